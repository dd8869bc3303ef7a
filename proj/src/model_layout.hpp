#pragma once

#include <string>

// Tensor names shared by the weight loader and the forward pass. Each
// prefix is completed with ".weight" or ".bias".
namespace lfsc::layout {

inline std::string encoder_input() { return "encoder.input"; }

inline std::string encoder_residual(int block, int layer, int conv) {
    return "encoder.blocks." + std::to_string(block) + ".res." + std::to_string(layer) + ".conv" +
           std::to_string(conv);
}

inline std::string encoder_down(int block) { return "encoder.blocks." + std::to_string(block) + ".down"; }

inline std::string encoder_proj() { return "encoder.proj"; }

inline std::string decoder_proj() { return "decoder.proj"; }

inline std::string decoder_up(int stage) { return "decoder.ups." + std::to_string(stage) + ".conv"; }

// conv is 1 (dilated) or 2 (dilation 1) within the pair for `dilation_index`.
inline std::string decoder_mrf(int stage, int kernel_index, int dilation_index, int conv) {
    return "decoder.ups." + std::to_string(stage) + ".mrf." + std::to_string(kernel_index) + ".convs" +
           std::to_string(conv) + "." + std::to_string(dilation_index);
}

inline std::string decoder_output() { return "decoder.output"; }

inline std::string weight(const std::string& prefix) { return prefix + ".weight"; }
inline std::string bias(const std::string& prefix) { return prefix + ".bias"; }

}  // namespace lfsc::layout

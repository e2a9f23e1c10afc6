#pragma once

#include <filesystem>

#include "invkit/tensor.hpp"

namespace invkit {

/// Reads a .pgm (P5, maxval ≤ 255, mapped to [0,1]) or .pfm image.
///
/// Grayscale files give [H, W]; color PFM gives [3, H, W]. When `path` does not
/// exist but `<stem>_re.pfm` and `<stem>_im.pfm` do, the pair is read as one
/// complex tensor. Both PFM byte orders are decoded.
Tensor read_image(const std::filesystem::path& path);

/// Writes by suffix. PFM stores float32, little-endian (scale -1); values are
/// rounded to float32. PGM stores round-half-up(255·clamp(v,0,1)). A complex
/// tensor is written as the PFM pair `<stem>_re.pfm`, `<stem>_im.pfm`.
void write_image(const Tensor& t, const std::filesystem::path& path);

/// round-half-up(255·clamp(v, 0, 1)).
int quantize_u8(double v);

} // namespace invkit

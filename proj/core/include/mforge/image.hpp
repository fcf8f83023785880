#pragma once

#include <cstdint>
#include <string>

#include "mforge/tensor.hpp"

namespace mforge {

// Binary PGM (P5, 8-bit) round trip for single-channel (1,H,W) images with
// values in [0,1]. Values are quantised as round(v * 255) on write.
void write_pgm(const std::string& path, const Tensor& image);
Tensor read_pgm(const std::string& path);

double clamp01(double v);
void clamp01_inplace(Tensor& image);

// Separable Gaussian blur with reflect boundary handling. sigma <= 0 returns
// the input unchanged. The kernel is normalised, so total mass is conserved.
Tensor gaussian_blur(const Tensor& image, double sigma);

// Variance of the 4-neighbour Laplacian response over interior pixels; a
// plain sharpness proxy (higher = more high-frequency content).
double laplacian_variance(const Tensor& image);

// FNV-1a over a byte buffer; used for manifest/checkpoint integrity.
std::uint64_t fnv1a64(const void* data, std::size_t len, std::uint64_t seed = 0xcbf29ce484222325ull);
std::uint64_t fnv1a64_file(const std::string& path, std::uint64_t seed = 0xcbf29ce484222325ull);

}  // namespace mforge

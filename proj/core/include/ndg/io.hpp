#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ndg/tensor.hpp"
#include "ndg/types.hpp"

namespace ndg {

/// Float map in PFM layout: "Pf" (1 channel) or "PF" (3 channels), rows
/// stored bottom-up, negative scale meaning little-endian payload.
struct PfmImage {
    int width = 0, height = 0, channels = 1;
    std::vector<float> data;  // top-down in memory, interleaved for 3ch
};

PfmImage read_pfm(const std::filesystem::path& path);
void write_pfm(const PfmImage& img, const std::filesystem::path& path);

Grid<double> grid_from_pfm(const PfmImage& img);
PfmImage pfm_from_grid(const Grid<double>& g);
NormalMap normalmap_from_pfm(const PfmImage& img);
PfmImage pfm_from_normalmap(const NormalMap& n);
DepthMap depthmap_from_pfm(const PfmImage& img);  // non-positive values invalid
PfmImage pfm_from_depthmap(const DepthMap& d);    // invalid pixels stored as 0
DistanceMap distancemap_from_pfm(const PfmImage& img);
PfmImage pfm_from_distancemap(const DistanceMap& d);

/// Binary P5 PGM, maxval 255 (masks) or 65535 (labels, big-endian samples).
Grid<uint16_t> read_pgm(const std::filesystem::path& path, int* maxval_out = nullptr);
void write_pgm(const Grid<uint16_t>& g, int maxval, const std::filesystem::path& path);
void write_mask_pgm(const std::vector<uint8_t>& mask, int width, int height,
                    const std::filesystem::path& path);
void write_labels_pgm(const std::vector<int>& labels, int width, int height,
                      const std::filesystem::path& path);

/// PLY with float32 x/y/z and optional uchar RGB.
void write_ply(const PointCloud& cloud, const std::filesystem::path& path, bool binary);
PointCloud read_ply(const std::filesystem::path& path);

/// Flat tensor container: magic "NDGW", u32 version, u32 count, then per
/// tensor: u32 name length, name bytes, u32 rank, u32 dims, f64 LE payload.
struct NamedTensor {
    std::string name;
    std::vector<uint32_t> dims;
    std::vector<double> data;
};
void write_tensor_container(const std::vector<NamedTensor>& tensors,
                            const std::filesystem::path& path);
std::vector<NamedTensor> read_tensor_container(const std::filesystem::path& path);

/// 4-line text sidecar: fx, fy, cx, cy.
Intrinsics read_intrinsics(const std::filesystem::path& path);
void write_intrinsics(const Intrinsics& k, const std::filesystem::path& path);

/// Writes via a temp file in the same directory, then renames into place.
void atomic_write(const std::filesystem::path& path, const std::string& contents);

}  // namespace ndg

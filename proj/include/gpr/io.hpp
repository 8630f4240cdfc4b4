#ifndef GPR_IO_HPP
#define GPR_IO_HPP

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "gpr/forward.hpp"
#include "gpr/nn/params.hpp"
#include "gpr/types.hpp"

namespace gpr::io {

// --- B-scan binary ("GPRB") --------------------------------------------
//
// magic "GPRB", version byte, M and N as little-endian u64, dt and t0 as
// f64, then N poses (x, y, z, heading, timestamp as f64), then M*N float32
// samples trace-major (each trace contiguous). Stream-appendable during
// acquisition.

void write_bscan(const std::filesystem::path& path, const BScan& bscan);
BScan read_bscan(const std::filesystem::path& path);

// --- portable graymap (binary P5) ----------------------------------------
//
// Energy images use maxval 65535 (big-endian 16-bit samples) scaled by the
// image maximum; masks use maxval 1. A sidecar text header "<file>.meta"
// carries dx, dz, origin and the scale.

void write_image_pgm(const std::filesystem::path& path, const MigrationImage& img);
MigrationImage read_image_pgm(const std::filesystem::path& path);

void write_mask_pgm(const std::filesystem::path& path, const CrossSectionMask& mask);
CrossSectionMask read_mask_pgm(const std::filesystem::path& path);

// --- point clouds -----------------------------------------------------

/// ASCII PLY, element vertex with double x/y/z properties.
void write_ply(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_ply(const std::filesystem::path& path);

/// Plain "x y z" triplets per line.
void write_xyz(const std::filesystem::path& path, const PointCloud& cloud);
PointCloud read_xyz(const std::filesystem::path& path);

PointCloud read_cloud(const std::filesystem::path& path);  // by extension

// --- trained parameters -------------------------------------------------
//
// magic "GPRW", version byte, architecture byte, width_multiplier f64,
// seed u64, count u64, then count little-endian float32 values in
// parameter declaration order.

void write_params(const std::filesystem::path& path, const nn::ParamStore& params);

struct ParamFile {
    nn::Architecture architecture;
    double width_multiplier;
    std::uint64_t seed;
    std::vector<double> values;
};

ParamFile read_params(const std::filesystem::path& path);

/// Loads a parameter file into a store built from the same spec; throws on
/// architecture or size mismatch.
void load_params_into(const ParamFile& file, nn::ParamStore& params);

// --- plain-text config ---------------------------------------------------
//
// key=value lines; '#' starts a comment; a "[pipe]" line opens a pipe
// section with its own keys (anchor, direction, radius, length, material).

struct ConfigFile {
    std::map<std::string, std::string> top;
    std::vector<std::map<std::string, std::string>> pipes;
};

ConfigFile parse_config(const std::filesystem::path& path);
ConfigFile parse_config_text(const std::string& text);

SlabModel slab_from_config(const ConfigFile& cfg);
AntennaConfig antenna_from_config(const ConfigFile& cfg);
void write_slab_config(const std::filesystem::path& path, const SlabModel& slab,
                       const AntennaConfig& antenna);

// --- manifests ------------------------------------------------------------

std::uint64_t fnv1a_file(const std::filesystem::path& path);

/// manifest.txt: header lines (key=value), then "checksum  relative-path"
/// per file, sorted by path.
void write_manifest(const std::filesystem::path& dir,
                    const std::map<std::string, std::string>& header,
                    const std::vector<std::filesystem::path>& files);

}  // namespace gpr::io

#endif  // GPR_IO_HPP

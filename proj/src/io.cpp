#include "gpr/io.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>

static_assert(std::endian::native == std::endian::little,
              "binary writers assume a little-endian host");

namespace gpr::io {

namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary) {
    std::ofstream f(path, binary ? std::ios::binary : std::ios::out);
    if (!f) throw std::runtime_error("cannot open for writing: " + path.string());
    return f;
}

std::ifstream open_in(const std::filesystem::path& path, bool binary) {
    std::ifstream f(path, binary ? std::ios::binary : std::ios::in);
    if (!f) throw std::runtime_error("cannot open for reading: " + path.string());
    return f;
}

template <typename T>
void put(std::ofstream& f, T v) {
    f.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T get(std::ifstream& f, const char* what) {
    T v{};
    f.read(reinterpret_cast<char*>(&v), sizeof(T));
    if (!f) throw std::runtime_error(std::string("truncated file while reading ") + what);
    return v;
}

void write_meta(const std::filesystem::path& path, double dx, double dz,
                double ox, double oz, double scale) {
    std::ofstream f = open_out(path, false);
    f.precision(17);
    f << "dx=" << dx << "\n"
      << "dz=" << dz << "\n"
      << "origin_x=" << ox << "\n"
      << "origin_z=" << oz << "\n"
      << "scale=" << scale << "\n";
}

std::map<std::string, double> read_meta(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, false);
    std::map<std::string, double> out;
    std::string line;
    while (std::getline(f, line)) {
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        out[line.substr(0, eq)] = std::stod(line.substr(eq + 1));
    }
    return out;
}

}  // namespace

void write_bscan(const std::filesystem::path& path, const BScan& bscan) {
    std::ofstream f = open_out(path, true);
    f.write("GPRB", 4);
    put<std::uint8_t>(f, 1);
    put<std::uint64_t>(f, bscan.samples_per_trace());
    put<std::uint64_t>(f, bscan.trace_count());
    put<double>(f, bscan.dt());
    put<double>(f, bscan.t0());
    for (const Pose& p : bscan.poses) {
        put<double>(f, p.position.x);
        put<double>(f, p.position.y);
        put<double>(f, p.position.z);
        put<double>(f, p.heading);
        put<double>(f, p.timestamp);
    }
    for (const AScan& trace : bscan.traces)
        for (double v : trace.samples)
            put<float>(f, static_cast<float>(v));
}

BScan read_bscan(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, true);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "GPRB", 4) != 0)
        throw std::runtime_error(path.string() + ": not a GPRB file");
    const auto version = get<std::uint8_t>(f, "version");
    if (version != 1)
        throw std::runtime_error(path.string() + ": unsupported GPRB version");
    const auto m = get<std::uint64_t>(f, "M");
    const auto n = get<std::uint64_t>(f, "N");
    const auto dt = get<double>(f, "dt");
    const auto t0 = get<double>(f, "t0");

    std::vector<Pose> poses;
    poses.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        const double x = get<double>(f, "pose.x");
        const double y = get<double>(f, "pose.y");
        const double z = get<double>(f, "pose.z");
        const double heading = get<double>(f, "pose.heading");
        const double ts = get<double>(f, "pose.timestamp");
        poses.emplace_back(Vec3{x, y, z}, heading, ts);
    }
    std::vector<AScan> traces;
    traces.reserve(n);
    for (std::uint64_t i = 0; i < n; ++i) {
        std::vector<double> samples(m);
        for (std::uint64_t j = 0; j < m; ++j)
            samples[j] = static_cast<double>(get<float>(f, "sample"));
        traces.emplace_back(std::move(samples), dt, t0);
    }
    // Nominal spacing is not stored; recover it from consecutive poses.
    double spacing = 0.005;
    if (n >= 2) {
        double acc = 0.0;
        for (std::uint64_t i = 1; i < n; ++i)
            acc += (poses[i].position - poses[i - 1].position).norm();
        const double mean = acc / static_cast<double>(n - 1);
        if (mean > 0.0) spacing = mean;
    }
    return BScan(std::move(traces), std::move(poses), spacing);
}

void write_image_pgm(const std::filesystem::path& path, const MigrationImage& img) {
    double peak = 0.0;
    for (double v : img.data) {
        if (v < 0.0)
            throw std::invalid_argument("write_image_pgm: energy images must be non-negative");
        peak = std::max(peak, v);
    }
    const double scale = peak > 0.0 ? peak : 1.0;
    std::ofstream f = open_out(path, true);
    f << "P5\n" << img.cols << " " << img.rows << "\n65535\n";
    for (double v : img.data) {
        const auto q = static_cast<std::uint16_t>(
            std::llround(v / scale * 65535.0));
        const std::uint8_t hi = static_cast<std::uint8_t>(q >> 8);
        const std::uint8_t lo = static_cast<std::uint8_t>(q & 0xff);
        put(f, hi);
        put(f, lo);
    }
    write_meta(path.string() + ".meta", img.dx, img.dz, img.origin_x,
               img.origin_z, scale);
}

namespace {

void read_pgm_header(std::ifstream& f, const std::filesystem::path& path,
                     std::size_t& cols, std::size_t& rows, std::size_t& maxval) {
    std::string magic;
    f >> magic;
    if (magic != "P5") throw std::runtime_error(path.string() + ": not a P5 graymap");
    f >> cols >> rows >> maxval;
    f.get();  // single whitespace after maxval
    if (!f) throw std::runtime_error(path.string() + ": bad PGM header");
}

}  // namespace

MigrationImage read_image_pgm(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, true);
    std::size_t cols, rows, maxval;
    read_pgm_header(f, path, cols, rows, maxval);
    if (maxval != 65535)
        throw std::runtime_error(path.string() + ": expected 16-bit energy graymap");
    const auto meta = read_meta(path.string() + ".meta");
    MigrationImage img(rows, cols, meta.at("dx"), meta.at("dz"),
                       meta.at("origin_x"), meta.at("origin_z"));
    const double scale = meta.at("scale");
    for (double& v : img.data) {
        const auto hi = get<std::uint8_t>(f, "pixel");
        const auto lo = get<std::uint8_t>(f, "pixel");
        const std::uint16_t q = static_cast<std::uint16_t>((hi << 8) | lo);
        v = static_cast<double>(q) / 65535.0 * scale;
    }
    return img;
}

void write_mask_pgm(const std::filesystem::path& path, const CrossSectionMask& mask) {
    std::ofstream f = open_out(path, true);
    f << "P5\n" << mask.cols << " " << mask.rows << "\n1\n";
    for (std::uint8_t v : mask.data) put<std::uint8_t>(f, v ? 1 : 0);
    write_meta(path.string() + ".meta", mask.dx, mask.dz, mask.origin_x,
               mask.origin_z, 1.0);
}

CrossSectionMask read_mask_pgm(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, true);
    std::size_t cols, rows, maxval;
    read_pgm_header(f, path, cols, rows, maxval);
    if (maxval != 1)
        throw std::runtime_error(path.string() + ": expected binary mask graymap");
    const auto meta = read_meta(path.string() + ".meta");
    CrossSectionMask mask(rows, cols, meta.at("dx"), meta.at("dz"),
                          meta.at("origin_x"), meta.at("origin_z"));
    for (std::uint8_t& v : mask.data) v = get<std::uint8_t>(f, "pixel") ? 1 : 0;
    return mask;
}

void write_ply(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream f = open_out(path, false);
    f << "ply\nformat ascii 1.0\n"
      << "element vertex " << cloud.size() << "\n"
      << "property double x\nproperty double y\nproperty double z\n"
      << "end_header\n";
    f.precision(17);
    for (const Vec3& p : cloud.points)
        f << p.x << " " << p.y << " " << p.z << "\n";
}

PointCloud read_ply(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, false);
    std::string line;
    std::size_t count = 0;
    bool in_header = true;
    while (in_header && std::getline(f, line)) {
        std::istringstream ss(line);
        std::string word;
        ss >> word;
        if (word == "element") {
            std::string kind;
            ss >> kind >> count;
            if (kind != "vertex")
                throw std::runtime_error(path.string() + ": only vertex elements supported");
        } else if (word == "end_header") {
            in_header = false;
        }
    }
    if (in_header) throw std::runtime_error(path.string() + ": missing PLY header");
    PointCloud cloud;
    cloud.points.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        double x, y, z;
        if (!(f >> x >> y >> z))
            throw std::runtime_error(path.string() + ": truncated vertex list");
        cloud.points.push_back({x, y, z});
    }
    return cloud;
}

void write_xyz(const std::filesystem::path& path, const PointCloud& cloud) {
    std::ofstream f = open_out(path, false);
    f.precision(17);
    for (const Vec3& p : cloud.points)
        f << p.x << " " << p.y << " " << p.z << "\n";
}

PointCloud read_xyz(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, false);
    PointCloud cloud;
    double x, y, z;
    while (f >> x >> y >> z) cloud.points.push_back({x, y, z});
    return cloud;
}

PointCloud read_cloud(const std::filesystem::path& path) {
    if (path.extension() == ".ply") return read_ply(path);
    if (path.extension() == ".xyz") return read_xyz(path);
    throw std::runtime_error("unknown point cloud format: " + path.string());
}

void write_params(const std::filesystem::path& path, const nn::ParamStore& params) {
    std::ofstream f = open_out(path, true);
    f.write("GPRW", 4);
    put<std::uint8_t>(f, 1);
    put<std::uint8_t>(f, static_cast<std::uint8_t>(params.architecture()));
    put<double>(f, params.width_multiplier());
    put<std::uint64_t>(f, params.seed());
    const std::vector<double> flat = params.flatten();
    put<std::uint64_t>(f, flat.size());
    for (double v : flat) put<float>(f, static_cast<float>(v));
}

ParamFile read_params(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, true);
    char magic[4];
    f.read(magic, 4);
    if (!f || std::memcmp(magic, "GPRW", 4) != 0)
        throw std::runtime_error(path.string() + ": not a GPRW parameter file");
    const auto version = get<std::uint8_t>(f, "version");
    if (version != 1)
        throw std::runtime_error(path.string() + ": unsupported GPRW version");
    ParamFile out;
    out.architecture = static_cast<nn::Architecture>(get<std::uint8_t>(f, "architecture"));
    out.width_multiplier = get<double>(f, "width_multiplier");
    out.seed = get<std::uint64_t>(f, "seed");
    const auto count = get<std::uint64_t>(f, "count");
    out.values.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i)
        out.values.push_back(static_cast<double>(get<float>(f, "value")));
    return out;
}

void load_params_into(const ParamFile& file, nn::ParamStore& params) {
    if (file.architecture != params.architecture())
        throw std::runtime_error("parameter file architecture mismatch");
    if (file.width_multiplier != params.width_multiplier())
        throw std::runtime_error("parameter file width multiplier mismatch");
    if (file.values.size() != params.total_params())
        throw std::runtime_error("parameter file size mismatch");
    params.assign_flat(file.values);
    params.set_seed(file.seed);
}

ConfigFile parse_config_text(const std::string& text) {
    ConfigFile out;
    std::map<std::string, std::string>* section = &out.top;
    std::istringstream ss(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(ss, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        auto first = line.find_first_not_of(" \t\r");
        if (first == std::string::npos) continue;
        auto last = line.find_last_not_of(" \t\r");
        line = line.substr(first, last - first + 1);
        if (line == "[pipe]") {
            out.pipes.emplace_back();
            section = &out.pipes.back();
            continue;
        }
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value, got '" + line + "'");
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t");
            const auto b = s.find_last_not_of(" \t");
            return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
        };
        (*section)[trim(line.substr(0, eq))] = trim(line.substr(eq + 1));
    }
    return out;
}

ConfigFile parse_config(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, false);
    std::stringstream buffer;
    buffer << f.rdbuf();
    return parse_config_text(buffer.str());
}

namespace {

double want_double(const std::map<std::string, std::string>& kv,
                   const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end())
        throw std::runtime_error("config: missing key '" + key + "'");
    return std::stod(it->second);
}

double opt_double(const std::map<std::string, std::string>& kv,
                  const std::string& key, double fallback) {
    const auto it = kv.find(key);
    return it == kv.end() ? fallback : std::stod(it->second);
}

Vec3 want_vec3(const std::map<std::string, std::string>& kv,
               const std::string& key) {
    const auto it = kv.find(key);
    if (it == kv.end())
        throw std::runtime_error("config: missing key '" + key + "'");
    std::istringstream ss(it->second);
    Vec3 v;
    char comma;
    if (!(ss >> v.x >> comma >> v.y >> comma >> v.z))
        throw std::runtime_error("config: key '" + key + "' is not 'x,y,z'");
    return v;
}

}  // namespace

SlabModel slab_from_config(const ConfigFile& cfg) {
    const Vec3 dims{want_double(cfg.top, "length"), want_double(cfg.top, "width"),
                    want_double(cfg.top, "thickness")};
    std::vector<PipeSpec> pipes;
    for (const auto& section : cfg.pipes) {
        const auto mat_it = section.find("material");
        pipes.emplace_back(want_vec3(section, "anchor"),
                           want_vec3(section, "direction"),
                           want_double(section, "radius"),
                           want_double(section, "length"),
                           mat_it == section.end()
                               ? PipeMaterial::PEC
                               : pipe_material_from_string(mat_it->second));
    }
    return SlabModel(dims, opt_double(cfg.top, "rel_permittivity", 7.0),
                     opt_double(cfg.top, "conductivity", 0.01),
                     opt_double(cfg.top, "rel_permeability", 1.0),
                     std::move(pipes));
}

AntennaConfig antenna_from_config(const ConfigFile& cfg) {
    return AntennaConfig(
        opt_double(cfg.top, "center_frequency", 2e9),
        opt_double(cfg.top, "tx_rx_offset", 0.05),
        opt_double(cfg.top, "time_window", 5e-9),
        opt_double(cfg.top, "trace_spacing", 0.005),
        static_cast<std::size_t>(opt_double(cfg.top, "samples_per_trace", 256)));
}

void write_slab_config(const std::filesystem::path& path, const SlabModel& slab,
                       const AntennaConfig& antenna) {
    std::ofstream f = open_out(path, false);
    f.precision(17);
    f << "length=" << slab.dims.x << "\n"
      << "width=" << slab.dims.y << "\n"
      << "thickness=" << slab.dims.z << "\n"
      << "rel_permittivity=" << slab.rel_permittivity << "\n"
      << "conductivity=" << slab.conductivity << "\n"
      << "rel_permeability=" << slab.rel_permeability << "\n"
      << "center_frequency=" << antenna.center_frequency << "\n"
      << "tx_rx_offset=" << antenna.tx_rx_offset << "\n"
      << "time_window=" << antenna.time_window << "\n"
      << "trace_spacing=" << antenna.trace_spacing << "\n"
      << "samples_per_trace=" << antenna.samples_per_trace << "\n";
    for (const PipeSpec& p : slab.pipes) {
        f << "[pipe]\n"
          << "anchor=" << p.anchor.x << "," << p.anchor.y << "," << p.anchor.z << "\n"
          << "direction=" << p.direction.x << "," << p.direction.y << ","
          << p.direction.z << "\n"
          << "radius=" << p.radius << "\n"
          << "length=" << p.length << "\n"
          << "material=" << to_string(p.material) << "\n";
    }
}

std::uint64_t fnv1a_file(const std::filesystem::path& path) {
    std::ifstream f = open_in(path, true);
    std::uint64_t hash = 1469598103934665603ull;
    char buffer[4096];
    while (f.read(buffer, sizeof(buffer)) || f.gcount() > 0) {
        const std::streamsize got = f.gcount();
        for (std::streamsize i = 0; i < got; ++i) {
            hash ^= static_cast<std::uint8_t>(buffer[i]);
            hash *= 1099511628211ull;
        }
        if (!f) break;
    }
    return hash;
}

void write_manifest(const std::filesystem::path& dir,
                    const std::map<std::string, std::string>& header,
                    const std::vector<std::filesystem::path>& files) {
    std::vector<std::filesystem::path> sorted = files;
    std::sort(sorted.begin(), sorted.end());
    std::ofstream f = open_out(dir / "manifest.txt", false);
    for (const auto& [k, v] : header) f << k << "=" << v << "\n";
    f << "---\n";
    char hex[32];
    for (const auto& rel : sorted) {
        std::snprintf(hex, sizeof(hex), "%016llx",
                      static_cast<unsigned long long>(fnv1a_file(dir / rel)));
        f << hex << "  " << rel.generic_string() << "\n";
    }
}

}  // namespace gpr::io

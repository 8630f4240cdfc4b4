// gprkit command line: synthetic dataset generation and the survey pipeline
// (simulate -> migrate -> interpret -> register -> reconstruct -> evaluate).

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <random>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gpr/forward.hpp"
#include "gpr/io.hpp"
#include "gpr/migration.hpp"
#include "gpr/nn/gpr_net.hpp"
#include "gpr/nn/migration_net.hpp"
#include "gpr/nn/train.hpp"
#include "gpr/pointcloud.hpp"
#include "gpr/robot.hpp"

namespace fs = std::filesystem;
using namespace gpr;

namespace {

std::string index_name(const char* prefix, std::size_t i, const char* ext) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%s_%03zu%s", prefix, i, ext);
    return buf;
}

std::vector<fs::path> find_files(const fs::path& dir, const std::string& prefix,
                                 const std::string& ext) {
    std::vector<fs::path> out;
    if (!fs::exists(dir)) throw std::runtime_error("no such directory: " + dir.string());
    for (const auto& entry : fs::directory_iterator(dir)) {
        const std::string name = entry.path().filename().string();
        if (name.rfind(prefix, 0) == 0 && entry.path().extension() == ext)
            out.push_back(entry.path());
    }
    std::sort(out.begin(), out.end());
    return out;
}

NoiseSpec parse_noise(const std::string& text, std::uint64_t seed) {
    const auto colon = text.find(':');
    if (colon == std::string::npos)
        throw std::runtime_error("--noise expects kind:level, got '" + text + "'");
    return NoiseSpec(noise_kind_from_string(text.substr(0, colon)),
                     std::stod(text.substr(colon + 1)), seed);
}

std::vector<Pose> scan_line_poses(const SlabModel& slab, const AntennaConfig& antenna,
                                  double y) {
    const std::size_t n =
        static_cast<std::size_t>(std::floor(slab.dims.x / antenna.trace_spacing + 1e-9)) + 1;
    std::vector<Pose> poses;
    poses.reserve(n);
    for (std::size_t i = 0; i < n; ++i)
        poses.emplace_back(
            Vec3{static_cast<double>(i) * antenna.trace_spacing, y, 0.0}, 0.0,
            static_cast<double>(i) * 0.01);
    return poses;
}

std::vector<double> line_offsets(const SlabModel& slab, std::size_t lines) {
    std::vector<double> ys;
    const double margin = 0.02;
    const double span = slab.dims.y - 2.0 * margin;
    for (std::size_t k = 0; k < lines; ++k)
        ys.push_back(lines == 1 ? slab.dims.y / 2.0
                                : margin + span * static_cast<double>(k) /
                                               static_cast<double>(lines - 1));
    return ys;
}

// Random slab: 2-6 PEC bars at mixed azimuth, radius and depth.
SlabModel random_slab(std::mt19937_64& rng, double radius_min, double radius_max,
                      double depth_min, double depth_max, int pipes_min,
                      int pipes_max) {
    const Vec3 dims{0.35, 0.25, 0.25};
    std::uniform_int_distribution<int> count_dist(pipes_min, pipes_max);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    const int count = count_dist(rng);
    std::vector<PipeSpec> pipes;
    int guard = 0;
    while (static_cast<int>(pipes.size()) < count && guard++ < 1000) {
        const double r = radius_min + (radius_max - radius_min) * unit(rng);
        const double top = depth_min + (depth_max - depth_min) * unit(rng);
        const double zc = -(top + r);
        const double azimuth = (unit(rng) - 0.5) * (kPi / 4.0);  // within +/-22.5 deg of y
        const Vec3 dir{std::sin(azimuth), std::cos(azimuth), 0.0};
        const double xc = 0.06 + 0.23 * unit(rng);
        // walk from (xc, yc) to the shrunken-box walls along +/-dir
        const double pad_x = r * std::abs(dir.y) + 1e-4;
        const double pad_y = r * std::abs(dir.x) + 1e-4;
        const Vec3 center{xc, dims.y / 2.0, zc};
        double t_lo = -1e9, t_hi = 1e9;
        auto clip = [&](double c, double d, double lo, double hi) {
            if (std::abs(d) < 1e-12) return;
            double a = (lo - c) / d, b = (hi - c) / d;
            if (a > b) std::swap(a, b);
            t_lo = std::max(t_lo, a);
            t_hi = std::min(t_hi, b);
        };
        clip(center.x, dir.x, pad_x, dims.x - pad_x);
        clip(center.y, dir.y, pad_y, dims.y - pad_y);
        if (t_hi - t_lo < 0.08) continue;
        const Vec3 anchor = center + dir * t_lo;
        pipes.emplace_back(anchor, dir, r, t_hi - t_lo);
        // keep pipes from overlapping: top depths at least one diameter apart
        for (std::size_t k = 0; k + 1 < pipes.size(); ++k) {
            if (std::abs(pipes[k].anchor.z - zc) < 2.0 * (r + pipes[k].radius)) {
                pipes.pop_back();
                break;
            }
        }
    }
    return SlabModel(dims, 7.0, 0.01, 1.0, pipes);
}

void simulate_into(const SlabModel& slab, const AntennaConfig& antenna,
                   const fs::path& out, std::size_t scan_lines,
                   const std::string& noise, std::uint64_t seed,
                   std::vector<fs::path>& written) {
    fs::create_directories(out);
    const auto ys = line_offsets(slab, scan_lines);
    for (std::size_t k = 0; k < ys.size(); ++k) {
        const auto poses = scan_line_poses(slab, antenna, ys[k]);
        BScan bscan = synthesize_bscan(slab, antenna, poses);
        if (!noise.empty()) bscan = corrupt_bscan(bscan, parse_noise(noise, seed + k));
        const auto scan_name = index_name("scan", k, ".gprb");
        io::write_bscan(out / scan_name, bscan);
        written.push_back(scan_name);

        const double v = wave_velocity(slab);
        const GridSpec grid = GridSpec::for_bscan(bscan, v);
        const auto mask = ground_truth_mask(slab, poses, antenna, grid.dx, grid.dz);
        const auto mask_name = index_name("gt_mask", k, ".pgm");
        io::write_mask_pgm(out / mask_name, mask);
        written.push_back(mask_name);
        written.push_back(mask_name + ".meta");
    }
    if (!slab.pipes.empty()) {
        io::write_ply(out / "gt_cloud.ply", ground_truth_cloud(slab, 8096, seed));
        written.push_back("gt_cloud.ply");
    }
    std::ofstream meta(out / "velocity.txt");
    meta.precision(17);
    meta << "velocity=" << wave_velocity(slab) << "\n";
    written.push_back("velocity.txt");
}

int cmd_dataset(const std::string& config_path, const std::string& out_dir,
                std::size_t count, std::uint64_t seed) {
    AntennaConfig antenna;
    double radius_min = 0.006, radius_max = 0.015;
    double depth_min = 0.04, depth_max = 0.15;
    int pipes_min = 2, pipes_max = 6;
    std::size_t scan_lines = 5;
    if (!config_path.empty()) {
        const auto cfg = io::parse_config(config_path);
        antenna = io::antenna_from_config(cfg);
        auto get = [&](const char* key, double fallback) {
            const auto it = cfg.top.find(key);
            return it == cfg.top.end() ? fallback : std::stod(it->second);
        };
        radius_min = get("radius_min", radius_min);
        radius_max = get("radius_max", radius_max);
        depth_min = get("depth_min", depth_min);
        depth_max = get("depth_max", depth_max);
        pipes_min = static_cast<int>(get("pipe_count_min", pipes_min));
        pipes_max = static_cast<int>(get("pipe_count_max", pipes_max));
        scan_lines = static_cast<std::size_t>(get("scan_lines", scan_lines));
        count = static_cast<std::size_t>(get("count", static_cast<double>(count)));
    }
    if (pipes_min < 2 || pipes_max > 6 || pipes_min > pipes_max)
        throw std::runtime_error("dataset: pipe count range must stay within [2, 6]");
    if (radius_min <= 0 || radius_min > radius_max || depth_min <= 0 ||
        depth_min > depth_max)
        throw std::runtime_error("dataset: invalid radius/depth ranges");

    const fs::path out(out_dir);
    fs::create_directories(out);
    std::vector<fs::path> all_files;
    for (std::size_t s = 0; s < count; ++s) {
        std::mt19937_64 rng(seed + 1000 * s);
        const SlabModel slab = random_slab(rng, radius_min, radius_max, depth_min,
                                           depth_max, pipes_min, pipes_max);
        const fs::path slab_dir = out / index_name("slab", s, "");
        std::vector<fs::path> files;
        fs::create_directories(slab_dir);
        io::write_slab_config(slab_dir / "slab.cfg", slab, antenna);
        files.push_back("slab.cfg");
        simulate_into(slab, antenna, slab_dir, scan_lines, "", seed + 1000 * s + 7,
                      files);
        for (const auto& f : files)
            all_files.push_back(fs::path(index_name("slab", s, "")) / f);
    }
    io::write_manifest(out, {{"command", "dataset"},
                             {"seed", std::to_string(seed)},
                             {"count", std::to_string(count)}},
                       all_files);
    std::cout << "wrote " << count << " slabs under " << out_dir << "\n";
    return 0;
}

int stage_simulate(const std::string& config_path, const std::string& out_dir,
                   std::size_t scan_lines, const std::string& noise,
                   std::uint64_t seed) {
    const auto cfg = io::parse_config(config_path);
    const SlabModel slab = io::slab_from_config(cfg);
    const AntennaConfig antenna = io::antenna_from_config(cfg);
    std::vector<fs::path> files;
    simulate_into(slab, antenna, out_dir, scan_lines, noise, seed, files);
    io::write_manifest(out_dir, {{"stage", "simulate"},
                                 {"seed", std::to_string(seed)},
                                 {"noise", noise.empty() ? "none" : noise}},
                       files);
    std::cout << "simulated " << scan_lines << " scan lines into " << out_dir << "\n";
    return 0;
}

double read_velocity(const fs::path& dir) {
    std::ifstream f(dir / "velocity.txt");
    if (!f) throw std::runtime_error("missing velocity.txt in " + dir.string());
    std::string line;
    while (std::getline(f, line)) {
        if (line.rfind("velocity=", 0) == 0) return std::stod(line.substr(9));
    }
    throw std::runtime_error("velocity.txt in " + dir.string() + ": missing velocity field");
}

int stage_migrate(const std::string& in_dir, const std::string& out_dir) {
    const fs::path in(in_dir), out(out_dir);
    const double v = read_velocity(in);
    const auto scans = find_files(in, "scan", ".gprb");
    if (scans.empty()) throw std::runtime_error("no scan_*.gprb under " + in_dir);
    fs::create_directories(out);
    std::vector<fs::path> files;
    for (std::size_t k = 0; k < scans.size(); ++k) {
        const BScan bscan = io::read_bscan(scans[k]);
        const auto windows = crop_bscan(bscan);
        const auto offsets = crop_offsets(bscan.trace_count(), 1024);
        // desk-scale scans fit one window; wider surveys stack windows at
        // their trace offsets (overlap regions keep the first contribution)
        const GridSpec grid = GridSpec::for_bscan(bscan, v);
        MigrationImage full = grid.make_image();
        std::vector<bool> column_done(grid.cols, false);
        for (std::size_t w = 0; w < windows.size(); ++w) {
            const GridSpec wgrid = GridSpec::for_bscan(windows[w], v);
            const MigrationImage part = back_project_all(windows[w], v, wgrid);
            for (std::size_t i = 0; i < part.cols; ++i) {
                const std::size_t col = offsets[w] + i;
                if (column_done[col]) continue;
                column_done[col] = true;
                for (std::size_t j = 0; j < part.rows; ++j)
                    full.at(j, col) = part.at(j, i);
            }
        }
        const auto full_name = index_name("full_bp", k, ".pgm");
        io::write_image_pgm(out / full_name, full);
        files.push_back(full_name);
        files.push_back(full_name + ".meta");

        const StackedBpInput stacked = aggregate_bp(windows.front(), v, grid);
        for (int c = 0; c < 3; ++c) {
            const auto ch_name =
                index_name(("ch" + std::to_string(c)).c_str(), k, ".pgm");
            io::write_image_pgm(out / ch_name, stacked.channels[c]);
            files.push_back(ch_name);
            files.push_back(ch_name + ".meta");
        }
    }
    std::ofstream meta(out / "velocity.txt");
    meta.precision(17);
    meta << "velocity=" << v << "\n";
    files.push_back("velocity.txt");
    io::write_manifest(out, {{"stage", "migrate"}}, files);
    std::cout << "migrated " << scans.size() << " scans into " << out_dir << "\n";
    return 0;
}

// pad columns/rows by edge replication up to a multiple of 8, run the net,
// crop the probability map back
MigrationImage net_interpret(nn::MigrationNet& net, const StackedBpInput& stacked) {
    const MigrationImage& ref = stacked.channels[0];
    const std::size_t rows8 = (ref.rows + 7) / 8 * 8;
    const std::size_t cols8 = (ref.cols + 7) / 8 * 8;
    std::array<nn::Tensor, 3> channels;
    for (int c = 0; c < 3; ++c) {
        nn::Tensor t = nn::Tensor::zeros({1, rows8, cols8});
        for (std::size_t j = 0; j < rows8; ++j)
            for (std::size_t i = 0; i < cols8; ++i)
                t.data[j * cols8 + i] = stacked.channels[c].at(
                    std::min(j, ref.rows - 1), std::min(i, ref.cols - 1));
        channels[c] = std::move(t);
    }
    nn::Tape tape;
    const auto prob = tape.value(net.build(tape, channels));
    MigrationImage out(ref.rows, ref.cols, ref.dx, ref.dz, ref.origin_x, ref.origin_z);
    for (std::size_t j = 0; j < ref.rows; ++j)
        for (std::size_t i = 0; i < ref.cols; ++i)
            out.at(j, i) = prob.data[j * cols8 + i];
    return out;
}

int stage_interpret(const std::string& in_dir, const std::string& out_dir,
                    const std::string& mode, double threshold,
                    const std::string& params_path, double expected_wm) {
    const fs::path in(in_dir), out(out_dir);
    fs::create_directories(out);
    std::vector<fs::path> files;

    if (mode == "classical") {
        const auto images = find_files(in, "full_bp", ".pgm");
        if (images.empty()) throw std::runtime_error("no full_bp_*.pgm under " + in_dir);
        for (std::size_t k = 0; k < images.size(); ++k) {
            const MigrationImage bp = io::read_image_pgm(images[k]);
            const auto mask =
                binarize(max_normalize(hilbert_envelope(bp)), threshold);
            const auto name = index_name("mask", k, ".pgm");
            io::write_mask_pgm(out / name, mask);
            files.push_back(name);
            files.push_back(name + ".meta");
        }
        io::write_manifest(out, {{"stage", "interpret"},
                                 {"mode", "classical"},
                                 {"threshold", std::to_string(threshold)}},
                           files);
        std::cout << "interpreted " << images.size() << " planes (classical) into "
                  << out_dir << "\n";
        return 0;
    }
    if (mode != "net") throw std::runtime_error("--mode must be classical or net");
    if (params_path.empty()) throw std::runtime_error("net mode needs --params");

    const io::ParamFile pf = io::read_params(params_path);
    if (expected_wm > 0.0 && pf.width_multiplier != expected_wm)
        throw std::runtime_error(params_path + ": width multiplier " +
                                 std::to_string(pf.width_multiplier) +
                                 " does not match --width-multiplier");
    nn::MigrationNet net(
        nn::NetSpec(nn::Architecture::MigrationNet, pf.width_multiplier, pf.seed));
    io::load_params_into(pf, net.params());

    const auto ch0 = find_files(in, "ch0", ".pgm");
    if (ch0.empty()) throw std::runtime_error("no ch0_*.pgm under " + in_dir);
    for (std::size_t k = 0; k < ch0.size(); ++k) {
        StackedBpInput stacked;
        for (int c = 0; c < 3; ++c)
            stacked.channels[c] = io::read_image_pgm(
                in / index_name(("ch" + std::to_string(c)).c_str(), k, ".pgm"));
        const MigrationImage prob = net_interpret(net, stacked);
        const auto mask = binarize(prob, 0.5);
        const auto name = index_name("mask", k, ".pgm");
        io::write_mask_pgm(out / name, mask);
        files.push_back(name);
        files.push_back(name + ".meta");
    }
    io::write_manifest(out, {{"stage", "interpret"}, {"mode", "net"}}, files);
    std::cout << "interpreted " << ch0.size() << " planes (net) into " << out_dir << "\n";
    return 0;
}

int stage_register(const std::string& in_dir, const std::string& scans_dir,
                   const std::string& out_dir, std::size_t ifps_k) {
    const auto mask_files = find_files(in_dir, "mask", ".pgm");
    if (mask_files.empty()) throw std::runtime_error("no mask_*.pgm under " + in_dir);
    const auto scan_files = find_files(scans_dir, "scan", ".gprb");
    if (scan_files.size() != mask_files.size())
        throw std::runtime_error("mask/scan count mismatch between " + in_dir +
                                 " and " + scans_dir);
    std::vector<CrossSectionMask> masks;
    std::vector<std::vector<Pose>> poses;
    for (std::size_t k = 0; k < mask_files.size(); ++k) {
        masks.push_back(io::read_mask_pgm(mask_files[k]));
        poses.push_back(io::read_bscan(scan_files[k]).poses);
    }
    const PointCloud sparse = register_masks(masks, poses);
    fs::create_directories(out_dir);
    std::vector<fs::path> files;
    io::write_ply(fs::path(out_dir) / "sparse.ply", sparse);
    files.push_back("sparse.ply");
    if (sparse.size() >= ifps_k && ifps_k > 0) {
        io::write_ply(fs::path(out_dir) / "sparse_ifps.ply", ifps(sparse, ifps_k));
        files.push_back("sparse_ifps.ply");
    }
    io::write_manifest(out_dir, {{"stage", "register"},
                                 {"ifps_k", std::to_string(ifps_k)},
                                 {"points", std::to_string(sparse.size())}},
                       files);
    std::cout << "registered " << sparse.size() << " points into " << out_dir << "\n";
    return 0;
}

int stage_reconstruct(const std::string& in_path, const std::string& params_path,
                      const std::string& out_dir, double expected_wm) {
    const PointCloud sparse = io::read_cloud(in_path);
    const io::ParamFile pf = io::read_params(params_path);
    if (pf.architecture != nn::Architecture::GprNet)
        throw std::runtime_error(params_path + ": not GPRNet parameters");
    if (expected_wm > 0.0 && pf.width_multiplier != expected_wm)
        throw std::runtime_error(params_path + ": width multiplier " +
                                 std::to_string(pf.width_multiplier) +
                                 " does not match --width-multiplier");

    nn::GprNet::Config cfg;
    cfg.input_points = sparse.size();
    nn::GprNet net(nn::NetSpec(nn::Architecture::GprNet, pf.width_multiplier, pf.seed),
                   cfg);
    io::load_params_into(pf, net.params());

    const auto norm = normalize_cloud(sparse);
    const PointCloud dense_normalized = net.forward(norm.cloud);
    const PointCloud dense = denormalize_cloud(dense_normalized, norm.center, norm.scale);
    fs::create_directories(out_dir);
    io::write_ply(fs::path(out_dir) / "dense.ply", dense);
    io::write_manifest(out_dir, {{"stage", "reconstruct"},
                                 {"input_points", std::to_string(sparse.size())},
                                 {"output_points", std::to_string(dense.size())}},
                       {"dense.ply"});
    std::cout << "reconstructed " << dense.size() << " points into " << out_dir << "\n";
    return 0;
}

int stage_evaluate(const std::string& pred_path, const std::string& truth_path,
                   const std::string& out_path) {
    std::map<std::string, double> metrics;
    const fs::path pred(pred_path), truth(truth_path);
    if (pred.extension() == ".pgm") {
        // mask pair or energy-image pair, detected by maxval
        bool is_mask = false;
        {
            std::ifstream f(pred, std::ios::binary);
            std::string magic;
            std::size_t c, r, maxval;
            f >> magic >> c >> r >> maxval;
            is_mask = (maxval == 1);
        }
        MigrationImage x, y;
        if (is_mask) {
            const auto mp = io::read_mask_pgm(pred);
            const auto mt = io::read_mask_pgm(truth);
            metrics["iou"] = iou(mp, mt);
            metrics["pixel_acc"] = pixel_accuracy(mp, mt);
            x = mask_to_image(mp);
            y = mask_to_image(mt);
        } else {
            x = io::read_image_pgm(pred);
            y = io::read_image_pgm(truth);
        }
        metrics["mse"] = mse(x, y);
        metrics["rmse"] = rmse_image(x, y);
        metrics["ssim"] = ssim(x, y);
        try {
            metrics["snr_db"] = snr_db(x, y);
        } catch (const std::domain_error&) {
            // identical pair: SNR undefined
        }
    } else {
        const PointCloud p = io::read_cloud(pred);
        const PointCloud t = io::read_cloud(truth);
        metrics["chamfer"] = chamfer_distance(p, t);
        const EmdResult e = emd(p, t);
        metrics["emd"] = e.value;
        metrics["emd_exact"] = e.exact ? 1.0 : 0.0;
        metrics["l1_centroid"] = l1_centroid(p, t);
    }

    std::ostringstream text, ndjson;
    text.precision(6);
    ndjson.precision(17);
    ndjson << "{\"pred\":\"" << pred_path << "\",\"truth\":\"" << truth_path << "\"";
    for (const auto& [name, value] : metrics) {
        text << name << " = " << value << "\n";
        ndjson << ",\"" << name << "\":" << value;
    }
    ndjson << "}\n";
    std::cout << text.str();
    if (!out_path.empty()) {
        std::ofstream tf(out_path + ".txt");
        tf << text.str();
        std::ofstream jf(out_path + ".ndjson", std::ios::app);
        jf << ndjson.str();
    }
    return 0;
}

nn::TrainConfig train_config(double lr, std::size_t iterations, std::uint64_t seed) {
    nn::TrainConfig cfg;
    cfg.lr = lr;
    cfg.iterations = iterations;
    cfg.seed = seed;
    return cfg;
}

int cmd_train(const std::string& arch, const std::string& data_dir,
              const std::string& out_path, double lr, std::size_t iterations,
              double width_multiplier, std::uint64_t seed, std::size_t input_scale) {
    const fs::path data(data_dir);
    std::vector<fs::path> slab_dirs;
    for (const auto& e : fs::directory_iterator(data))
        if (e.is_directory() && e.path().filename().string().rfind("slab_", 0) == 0)
            slab_dirs.push_back(e.path());
    std::sort(slab_dirs.begin(), slab_dirs.end());
    if (slab_dirs.empty()) throw std::runtime_error("no slab_* directories under " + data_dir);

    if (arch == "migration") {
        std::vector<nn::MigrationSample> samples;
        for (const auto& dir : slab_dirs) {
            const double v = read_velocity(dir);
            const auto scans = find_files(dir, "scan", ".gprb");
            const auto masks = find_files(dir, "gt_mask", ".pgm");
            for (std::size_t k = 0; k < scans.size() && k < masks.size(); ++k) {
                const BScan bscan = io::read_bscan(scans[k]);
                const GridSpec grid = GridSpec::for_bscan(bscan, v);
                StackedBpInput stacked = aggregate_bp(bscan, v, grid);
                CrossSectionMask mask = io::read_mask_pgm(masks[k]);
                if (input_scale > 1) {
                    stacked = nn::downsample_input(stacked, input_scale);
                    CrossSectionMask small(mask.rows / input_scale,
                                           mask.cols / input_scale,
                                           mask.dx * input_scale, mask.dz * input_scale,
                                           mask.origin_x, mask.origin_z);
                    for (std::size_t j = 0; j < small.rows; ++j)
                        for (std::size_t i = 0; i < small.cols; ++i)
                            small.at(j, i) = mask.at(j * input_scale, i * input_scale);
                    mask = std::move(small);
                }
                // crop both to the /8 grid the encoder needs
                const std::size_t rows8 = stacked.channels[0].rows / 8 * 8;
                const std::size_t cols8 = stacked.channels[0].cols / 8 * 8;
                if (rows8 == 0 || cols8 == 0)
                    throw std::runtime_error("scan too small after --input-scale");
                StackedBpInput cropped;
                for (int c = 0; c < 3; ++c) {
                    MigrationImage im(rows8, cols8, stacked.channels[c].dx,
                                      stacked.channels[c].dz);
                    for (std::size_t j = 0; j < rows8; ++j)
                        for (std::size_t i = 0; i < cols8; ++i)
                            im.at(j, i) = stacked.channels[c].at(j, i);
                    cropped.channels[c] = std::move(im);
                }
                CrossSectionMask mask8(rows8, cols8, mask.dx, mask.dz);
                for (std::size_t j = 0; j < rows8; ++j)
                    for (std::size_t i = 0; i < cols8; ++i)
                        mask8.at(j, i) = mask.at(j, i);
                samples.push_back(nn::make_migration_sample(cropped, mask8));
            }
        }
        nn::MigrationNet net(
            nn::NetSpec(nn::Architecture::MigrationNet, width_multiplier, seed));
        const auto result =
            nn::train_migration_net(net, samples, train_config(lr, iterations, seed));
        io::write_params(out_path, net.params());
        std::cout << "trained MigrationNet on " << samples.size() << " samples, "
                  << result.loss_curve.size() << " iterations, final loss "
                  << result.loss_curve.back() << "\n";
        return 0;
    }
    if (arch != "gprnet") throw std::runtime_error("--arch must be migration or gprnet");

    // sparse input from IFPS of the ground-truth cloud, target the full cloud
    const PointCloud gt = io::read_ply(slab_dirs.front() / "gt_cloud.ply");
    const std::size_t k_in = std::min<std::size_t>(1500, gt.size());
    const auto sparse_norm = normalize_cloud(ifps(gt, k_in));
    const auto gt_norm = normalize_cloud(gt);

    nn::GprNet::Config netcfg;
    netcfg.input_points = k_in;
    nn::GprNet net(nn::NetSpec(nn::Architecture::GprNet, width_multiplier, seed), netcfg);
    const auto result = nn::train_gpr_net(net, sparse_norm.cloud, gt_norm.cloud,
                                          train_config(lr, iterations, seed));
    io::write_params(out_path, net.params());
    std::cout << "trained GPRNet (" << k_in << " -> " << net.output_points()
              << " points), " << result.loss_curve.size() << " iterations, final loss "
              << result.loss_curve.back() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"gprkit: synthetic GPR survey, migration and 3D reconstruction toolkit"};
    app.require_subcommand(1);

    // dataset
    std::string ds_config, ds_out = "dataset";
    std::size_t ds_count = 4;
    std::uint64_t ds_seed = 0;
    auto* dataset = app.add_subcommand("dataset", "generate a synthetic slab dataset");
    dataset->add_option("--config", ds_config, "generation config (key=value)");
    dataset->add_option("--out", ds_out, "output directory");
    dataset->add_option("--count", ds_count, "number of slabs");
    dataset->add_option("--seed", ds_seed, "master seed");

    // pipeline
    std::string stage, p_config, p_in, p_scans, p_out = "out", p_mode = "classical";
    std::string p_noise, p_params, p_pred, p_truth, p_report;
    double p_threshold = 0.45;
    double p_wm = 0.0;  // 0 = take the width multiplier from the params file
    std::size_t p_ifps_k = 1500, p_scan_lines = 5;
    std::uint64_t p_seed = 0;
    auto* pipeline = app.add_subcommand("pipeline", "run one survey pipeline stage");
    pipeline
        ->add_option("--stage", stage,
                     "simulate|migrate|interpret|register|reconstruct|evaluate")
        ->required();
    pipeline->add_option("--config", p_config, "slab config (simulate)");
    pipeline->add_option("--in", p_in, "input directory or file");
    pipeline->add_option("--scans", p_scans, "scan directory with poses (register)");
    pipeline->add_option("--out", p_out, "output directory or report base");
    pipeline->add_option("--mode", p_mode, "interpret mode: classical|net");
    pipeline->add_option("--noise", p_noise, "kind:level corruption (simulate)");
    pipeline->add_option("--threshold", p_threshold, "binarization threshold");
    pipeline->add_option("--width-multiplier", p_wm,
                         "expected network width (checked against --params)");
    pipeline->add_option("--ifps-k", p_ifps_k, "IFPS target size (register)");
    pipeline->add_option("--scan-lines", p_scan_lines, "parallel scan lines (simulate)");
    pipeline->add_option("--params", p_params, "network parameter file");
    pipeline->add_option("--pred", p_pred, "prediction file (evaluate)");
    pipeline->add_option("--truth", p_truth, "ground truth file (evaluate)");
    pipeline->add_option("--seed", p_seed, "stage seed");

    // train
    std::string t_arch = "migration", t_data, t_out = "params.gprw";
    double t_lr = 5e-6, t_wm = 1.0 / 16.0;
    std::size_t t_iters = 500, t_input_scale = 4;
    std::uint64_t t_seed = 0;
    auto* train = app.add_subcommand("train", "train a network on a dataset directory");
    train->add_option("--arch", t_arch, "migration|gprnet");
    train->add_option("--data", t_data, "dataset directory")->required();
    train->add_option("--out", t_out, "parameter output file");
    train->add_option("--lr", t_lr, "learning rate");
    train->add_option("--iterations", t_iters, "SGD iterations");
    train->add_option("--width-multiplier", t_wm, "channel shrink in (0,1]");
    train->add_option("--seed", t_seed, "init/train seed");
    train->add_option("--input-scale", t_input_scale,
                      "spatial downsampling of stacked inputs (migration)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*dataset) return cmd_dataset(ds_config, ds_out, ds_count, ds_seed);
        if (*pipeline) {
            if (stage == "simulate")
                return stage_simulate(p_config, p_out, p_scan_lines, p_noise, p_seed);
            if (stage == "migrate") return stage_migrate(p_in, p_out);
            if (stage == "interpret")
                return stage_interpret(p_in, p_out, p_mode, p_threshold, p_params, p_wm);
            if (stage == "register")
                return stage_register(p_in, p_scans, p_out, p_ifps_k);
            if (stage == "reconstruct")
                return stage_reconstruct(p_in, p_params, p_out, p_wm);
            if (stage == "evaluate") return stage_evaluate(p_pred, p_truth, p_report);
            throw std::runtime_error("unknown stage: " + stage);
        }
        if (*train)
            return cmd_train(t_arch, t_data, t_out, t_lr, t_iters, t_wm, t_seed,
                             t_input_scale);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

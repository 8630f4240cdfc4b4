#include "gpr/nn/migration_net.hpp"

#include <stdexcept>
#include <string>

namespace gpr::nn {

namespace {

constexpr std::size_t kPoolKernels[3] = {8, 4, 2};

}  // namespace

MigrationNet::MigrationNet(const NetSpec& spec)
    : spec_(spec),
      params_(Architecture::MigrationNet, spec.width_multiplier, spec.seed),
      c_(spec.scaled(512)) {
    if (spec.architecture != Architecture::MigrationNet)
        throw std::invalid_argument("MigrationNet: wrong architecture tag");

    for (int e = 0; e < 3; ++e) {
        const std::string p = "ext" + std::to_string(e);
        params_.add_he(p + ".conv1.w", {c_, 1, 3, 3}, 9);
        params_.add_zeros(p + ".conv1.b", {c_});
        params_.add_he(p + ".conv2.w", {c_, c_, 3, 3}, c_ * 9);
        params_.add_zeros(p + ".conv2.b", {c_});
    }

    dec_ = {spec.scaled(256), spec.scaled(128), spec.scaled(64), spec.scaled(32)};
    std::size_t in = 3 * c_;
    for (int u = 0; u < 4; ++u) {
        const std::string p = "dec" + std::to_string(u);
        const std::size_t skip = (u < 3) ? c_ : 0;       // skip from extractor u
        const std::size_t mid = (u == 0) ? c_ : in;      // group working width
        params_.add_he(p + ".conv1.w", {mid, in + skip, 1, 1}, in + skip);
        params_.add_zeros(p + ".conv1.b", {mid});
        params_.add_he(p + ".conv2.w", {mid, mid, 3, 3}, mid * 9);
        params_.add_zeros(p + ".conv2.b", {mid});
        params_.add_he(p + ".tconv.w", {mid, dec_[u], 3, 3}, mid * 9);
        params_.add_zeros(p + ".tconv.b", {dec_[u]});
        in = dec_[u];
    }
    params_.add_he("head.w", {1, in, 1, 1}, in);
    params_.add_zeros("head.b", {1});
}

Tape::Id MigrationNet::build(Tape& tape, const std::array<Tensor, 3>& channels) {
    const std::size_t h = channels[0].dim(1);
    const std::size_t w = channels[0].dim(2);
    if (h % 8 != 0 || w % 8 != 0)
        throw std::invalid_argument("MigrationNet: spatial dims must be divisible by 8");
    for (const Tensor& ch : channels)
        if (ch.shape.size() != 3 || ch.dim(0) != 1 || ch.dim(1) != h || ch.dim(2) != w)
            throw std::invalid_argument("MigrationNet: channels must share [1,H,W]");

    auto pw = [&](const std::string& name) {
        ParamStore::Entry* e = params_.find(name);
        return tape.leaf(e->value, &e->grad);
    };

    std::array<Tape::Id, 3> feats{};
    for (int e = 0; e < 3; ++e) {
        const std::string p = "ext" + std::to_string(e);
        Tape::Id x = tape.leaf(channels[static_cast<std::size_t>(e)]);
        x = tape.relu(tape.conv2d(x, pw(p + ".conv1.w"), pw(p + ".conv1.b")));
        x = tape.relu(tape.conv2d(x, pw(p + ".conv2.w"), pw(p + ".conv2.b")));
        x = tape.maxpool2d(x, kPoolKernels[e]);
        feats[static_cast<std::size_t>(e)] = tape.upsample_nearest2d(x, kPoolKernels[e]);
    }

    Tape::Id x = tape.concat_channels({feats[0], feats[1], feats[2]});
    for (int u = 0; u < 4; ++u) {
        const std::string p = "dec" + std::to_string(u);
        if (u < 3) x = tape.concat_channels({x, feats[static_cast<std::size_t>(u)]});
        x = tape.relu(tape.conv2d(x, pw(p + ".conv1.w"), pw(p + ".conv1.b")));
        x = tape.relu(tape.conv2d(x, pw(p + ".conv2.w"), pw(p + ".conv2.b")));
        x = tape.relu(tape.conv2d_transpose(x, pw(p + ".tconv.w"), pw(p + ".tconv.b")));
    }
    x = tape.conv2d(x, pw("head.w"), pw("head.b"));
    return tape.sigmoid(x);
}

std::array<Tensor, 3> MigrationNet::to_tensors(const StackedBpInput& input) {
    std::array<Tensor, 3> out;
    for (std::size_t c = 0; c < 3; ++c) {
        const MigrationImage& img = input.channels[c];
        out[c] = Tensor::from({1, img.rows, img.cols}, img.data);
    }
    return out;
}

MigrationImage MigrationNet::forward(const StackedBpInput& input) {
    Tape tape;
    const Tape::Id out = build(tape, to_tensors(input));
    const Tensor& prob = tape.value(out);
    for (double v : prob.data)
        if (!std::isfinite(v))
            throw std::runtime_error("MigrationNet: non-finite activation");
    const MigrationImage& ref = input.channels[0];
    MigrationImage img(ref.rows, ref.cols, ref.dx, ref.dz, ref.origin_x, ref.origin_z);
    img.data = prob.data;
    return img;
}

StackedBpInput downsample_input(const StackedBpInput& input, std::size_t factor) {
    if (factor == 0) throw std::invalid_argument("downsample_input: zero factor");
    if (factor == 1) return input;
    StackedBpInput out;
    out.window_begin = input.window_begin;
    out.window_end = input.window_end;
    for (std::size_t c = 0; c < 3; ++c) {
        const MigrationImage& src = input.channels[c];
        const std::size_t rows = src.rows / factor;
        const std::size_t cols = src.cols / factor;
        if (rows == 0 || cols == 0)
            throw std::invalid_argument("downsample_input: factor larger than image");
        MigrationImage dst(rows, cols, src.dx * static_cast<double>(factor),
                           src.dz * static_cast<double>(factor), src.origin_x,
                           src.origin_z);
        for (std::size_t j = 0; j < rows; ++j)
            for (std::size_t i = 0; i < cols; ++i)
                dst.at(j, i) = src.at(j * factor, i * factor);
        out.channels[c] = std::move(dst);
    }
    return out;
}

}  // namespace gpr::nn

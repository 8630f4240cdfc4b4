#include "gpr/nn/params.hpp"

#include <cmath>
#include <stdexcept>

namespace gpr::nn {

NetSpec::NetSpec(Architecture arch, double wm, std::uint64_t s)
    : architecture(arch), width_multiplier(wm), seed(s) {
    if (!(wm > 0.0 && wm <= 1.0))
        throw std::invalid_argument("NetSpec: width_multiplier must be in (0, 1]");
}

std::size_t NetSpec::scaled(std::size_t full_width) const {
    const auto scaled = static_cast<std::size_t>(
        std::llround(static_cast<double>(full_width) * width_multiplier));
    return std::max<std::size_t>(4, scaled);
}

ParamStore::ParamStore(Architecture arch, double width_multiplier,
                       std::uint64_t seed)
    : arch_(arch), width_multiplier_(width_multiplier), seed_(seed),
      init_rng_(seed) {}

Tensor& ParamStore::add_he(const std::string& name,
                           std::vector<std::size_t> shape, std::size_t fan_in) {
    Entry e;
    e.name = name;
    e.value = Tensor::zeros(shape);
    e.grad = Tensor::zeros(shape);
    e.velocity = Tensor::zeros(std::move(shape));
    std::normal_distribution<double> dist(
        0.0, std::sqrt(2.0 / static_cast<double>(fan_in)));
    for (double& v : e.value.data) v = dist(init_rng_);
    entries_.push_back(std::move(e));
    return entries_.back().value;
}

Tensor& ParamStore::add_zeros(const std::string& name,
                              std::vector<std::size_t> shape) {
    Entry e;
    e.name = name;
    e.value = Tensor::zeros(shape);
    e.grad = Tensor::zeros(shape);
    e.velocity = Tensor::zeros(std::move(shape));
    entries_.push_back(std::move(e));
    return entries_.back().value;
}

ParamStore::Entry* ParamStore::find(const std::string& name) {
    for (Entry& e : entries_)
        if (e.name == name) return &e;
    return nullptr;
}

void ParamStore::zero_grads() {
    for (Entry& e : entries_)
        std::fill(e.grad.data.begin(), e.grad.data.end(), 0.0);
}

std::size_t ParamStore::total_params() const {
    std::size_t n = 0;
    for (const Entry& e : entries_) n += e.value.numel();
    return n;
}

std::vector<double> ParamStore::flatten() const {
    std::vector<double> out;
    out.reserve(total_params());
    for (const Entry& e : entries_)
        out.insert(out.end(), e.value.data.begin(), e.value.data.end());
    return out;
}

void ParamStore::assign_flat(const std::vector<double>& values) {
    if (values.size() != total_params())
        throw std::invalid_argument("ParamStore: flat value count mismatch");
    std::size_t k = 0;
    for (Entry& e : entries_)
        for (double& v : e.value.data) v = values[k++];
}

}  // namespace gpr::nn

#ifndef GPR_NN_PARAMS_HPP
#define GPR_NN_PARAMS_HPP

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "gpr/nn/tensor.hpp"

namespace gpr::nn {

enum class Architecture : std::uint8_t { MigrationNet = 0, GprNet = 1 };

/// Architecture selector plus the desk-scale channel shrink.
struct NetSpec {
    Architecture architecture = Architecture::MigrationNet;
    double width_multiplier = 1.0 / 16.0;
    std::uint64_t seed = 0;

    NetSpec() = default;
    NetSpec(Architecture arch, double wm, std::uint64_t s);

    /// Channel count scaled by the width multiplier, floored at 4.
    std::size_t scaled(std::size_t full_width) const;
};

/**
 * @brief Named trainable tensors in declaration order, with gradient and
 * momentum buffers. Declaration order defines the serialization layout.
 */
class ParamStore {
public:
    struct Entry {
        std::string name;
        Tensor value;
        Tensor grad;
        Tensor velocity;
    };

    ParamStore(Architecture arch, double width_multiplier, std::uint64_t seed);

    /// He-normal initialized tensor, N(0, sqrt(2/fan_in)).
    Tensor& add_he(const std::string& name, std::vector<std::size_t> shape,
                   std::size_t fan_in);
    Tensor& add_zeros(const std::string& name, std::vector<std::size_t> shape);

    Entry& entry(std::size_t i) { return entries_[i]; }
    const Entry& entry(std::size_t i) const { return entries_[i]; }
    std::size_t entry_count() const { return entries_.size(); }

    Entry* find(const std::string& name);

    void zero_grads();
    std::size_t total_params() const;

    Architecture architecture() const { return arch_; }
    double width_multiplier() const { return width_multiplier_; }
    std::uint64_t seed() const { return seed_; }
    /// Re-tags the init provenance (used when parameters are loaded from file).
    void set_seed(std::uint64_t seed) { seed_ = seed; }

    /// Copies raw values in declaration order (used by the serializer).
    std::vector<double> flatten() const;
    void assign_flat(const std::vector<double>& values);

private:
    Architecture arch_;
    double width_multiplier_;
    std::uint64_t seed_;
    std::mt19937_64 init_rng_;
    std::vector<Entry> entries_;
};

}  // namespace gpr::nn

#endif  // GPR_NN_PARAMS_HPP

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace matt {

using Vector = std::vector<double>;

/// Dense row-major matrix of doubles.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0);
    Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

    static Matrix identity(std::size_t n);
    static Matrix column(std::span<const double> values);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    std::size_t size() const noexcept { return data_.size(); }
    bool empty() const noexcept { return data_.empty(); }

    double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }
    double& operator[](std::size_t i) { return data_[i]; }
    double operator[](std::size_t i) const { return data_[i]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<double> data() noexcept { return data_; }
    std::span<const double> data() const noexcept { return data_; }

    void fill(double value);
    bool all_finite() const;

    friend bool operator==(const Matrix&, const Matrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

/// A named trainable tensor with its gradient accumulator.
struct Parameter {
    std::string name;
    Matrix value;
    Matrix grad;
};

/// Ordered collection of parameters. Iteration order is insertion order, which
/// also fixes checkpoint layout and optimizer traversal order.
class ParamStore {
public:
    Parameter& add(std::string name, Matrix init);

    bool contains(std::string_view name) const;
    Parameter& at(std::string_view name);
    const Parameter& at(std::string_view name) const;

    std::vector<Parameter>& items() noexcept { return params_; }
    const std::vector<Parameter>& items() const noexcept { return params_; }
    std::size_t size() const noexcept { return params_.size(); }

    void zero_grad();

    /// Bitwise equality of names, shapes and values (gradients ignored).
    bool same_values(const ParamStore& other) const;

private:
    std::vector<Parameter> params_;
};

// ---------------------------------------------------------------------------
// Seeding and initialization

/// Mixes a base seed with a stream index (splitmix64 finalizer).
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream);

/// Entries i.i.d. uniform on [-a, a], a = sqrt(6 / (rows + cols)).
Matrix xavier_uniform(std::size_t rows, std::size_t cols, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Differentiable primitives. Every *_backward accumulates (+=) into its
// gradient outputs; nothing is overwritten.

/// y = W x + b
Vector affine(const Matrix& weight, std::span<const double> x, std::span<const double> bias);
void affine_backward(const Matrix& weight, std::span<const double> x, std::span<const double> dy,
                     Matrix& dweight, std::span<double> dbias, std::span<double> dx);

Vector tanh_forward(std::span<const double> x);
/// Uses the forward output y = tanh(x): dx += dy * (1 - y^2).
void tanh_backward(std::span<const double> y, std::span<const double> dy, std::span<double> dx);

/// Max-subtracted softmax.
Vector softmax(std::span<const double> x);
void softmax_backward(std::span<const double> p, std::span<const double> dp, std::span<double> dx);

Vector vconcat(std::span<const double> x, std::span<const double> y);
void vconcat_backward(std::span<const double> dz, std::span<double> dx, std::span<double> dy);

/// g = sum_k w_k v_k
Vector weighted_sum(std::span<const double> weights, const std::vector<Vector>& vectors);
void weighted_sum_backward(std::span<const double> weights, const std::vector<Vector>& vectors,
                           std::span<const double> dg, std::span<double> dweights,
                           std::vector<Vector>& dvectors);

double dot(std::span<const double> a, std::span<const double> b);

// ---------------------------------------------------------------------------
// Optimizers

enum class OptimizerKind { Sgd, Adam };

struct OptimizerConfig {
    OptimizerKind kind = OptimizerKind::Adam;
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

class Optimizer {
public:
    explicit Optimizer(OptimizerConfig config);

    /// Applies one update from the accumulated gradients, then zeroes them.
    /// Throws DivergedError if any gradient is non-finite (parameters untouched).
    void step(ParamStore& params);

    std::uint64_t steps() const noexcept { return steps_; }
    const OptimizerConfig& config() const noexcept { return config_; }

private:
    struct Moments {
        Matrix first;
        Matrix second;
    };

    OptimizerConfig config_;
    std::uint64_t steps_ = 0;
    std::map<std::string, Moments> moments_;
};

OptimizerKind parse_optimizer_kind(std::string_view name);

// ---------------------------------------------------------------------------
// Finite-difference gradient checking

struct GradCheckOptions {
    double step = 1e-5;
    double tolerance = 1e-4;
    /// Tensors larger than this are checked on a random subsample.
    std::size_t full_check_limit = 256;
    std::size_t sample_size = 128;
    std::uint64_t seed = 0;
};

struct ParamCheck {
    std::string name;
    std::size_t checked = 0;
    double max_rel_error = 0.0;
    std::size_t worst_index = 0;
    double worst_analytic = 0.0;
    double worst_numeric = 0.0;
    bool passed = true;
};

struct GradCheckReport {
    std::vector<ParamCheck> params;
    double max_rel_error = 0.0;
    bool passed = true;
};

/// Compares the gradients currently held in `params` against central
/// differences of `loss`. Relative error uses max(|a|, |n|, 1e-8) as the
/// denominator. Parameter values are restored exactly afterwards.
GradCheckReport finite_difference_check(const std::function<double()>& loss, ParamStore& params,
                                        const GradCheckOptions& options = {});

// ---------------------------------------------------------------------------
// Checkpoints: "MATT", u32 version = 1, u32 count, then per parameter
// u16 name length, name bytes, u32 rows, u32 cols, rows*cols f64 (all LE).

std::string encode_checkpoint(const ParamStore& params);
ParamStore decode_checkpoint(std::string_view bytes);
void save_checkpoint(const std::string& path, const ParamStore& params);
ParamStore load_checkpoint(const std::string& path);

}  // namespace matt

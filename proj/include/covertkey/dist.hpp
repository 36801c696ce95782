#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace covertkey {

using Symbol = std::string;

namespace tol {
// Absolute tolerances. Normalization applies at construction, identity to
// derived quantities checked in tests.
inline constexpr double kNormalization = 1e-12;
inline constexpr double kIdentity = 1e-10;
inline constexpr double kAtomMerge = 1e-12;
}  // namespace tol

/// Probability vector over an ordered finite alphabet.
class DiscreteDist {
public:
    DiscreteDist(std::vector<Symbol> support, std::vector<double> probs,
                 double norm_tol = tol::kNormalization);

    /// Two-point distribution with P(one) = p1 over support {zero, one}.
    static DiscreteDist bernoulli(double p1, Symbol zero = "0", Symbol one = "1");

    const std::vector<Symbol>& support() const { return support_; }
    const std::vector<double>& probs() const { return probs_; }
    std::size_t size() const { return probs_.size(); }
    double operator[](std::size_t i) const { return probs_[i]; }

    bool same_support(const DiscreteDist& other) const;

private:
    std::vector<Symbol> support_;
    std::vector<double> probs_;
};

/// KL divergence in bits. Terms with p(x) = 0 contribute 0; p(x) > 0 with
/// q(x) = 0 throws AbsoluteContinuityViolation.
double kl_divergence(const DiscreteDist& p, const DiscreteDist& q);

/// KL divergence in nats (ln 2 times the bit value). Exists for inequalities
/// whose constants are base-sensitive, e.g. Pinsker's.
double kl_divergence_nats(const DiscreteDist& p, const DiscreteDist& q);

/// Total variation distance, 1/2 * L1.
double tv_distance(const DiscreteDist& p, const DiscreteDist& q);

/// Chi-squared divergence sum (p-q)^2/q.
double chi_squared(const DiscreteDist& p, const DiscreteDist& q);

/// Shannon entropy in bits, 0 log 0 = 0.
double entropy(const DiscreteDist& p);

/// Binary entropy in bits; DomainError outside [0, 1].
double binary_entropy(double x);

/// Dense joint law over a list of finite axes (row-major storage, last axis
/// fastest).
class JointDist {
public:
    JointDist(std::vector<std::vector<Symbol>> axes, std::vector<double> probs,
              double norm_tol = tol::kNormalization);

    std::size_t rank() const { return axes_.size(); }
    const std::vector<std::vector<Symbol>>& axes() const { return axes_; }
    std::size_t axis_size(std::size_t axis) const { return axes_[axis].size(); }
    const std::vector<double>& probs() const { return probs_; }

    double at(const std::vector<std::size_t>& index) const;

    /// Marginal joint over the listed axes (order preserved as given).
    JointDist marginal(const std::vector<std::size_t>& keep_axes) const;

    /// Marginal of a single axis as a DiscreteDist.
    DiscreteDist marginal_axis(std::size_t axis) const;

private:
    friend double mutual_information(const JointDist&, const std::vector<std::size_t>&,
                                     const std::vector<std::size_t>&,
                                     const std::vector<std::size_t>&);
    std::size_t offset(const std::vector<std::size_t>& index) const;

    std::vector<std::vector<Symbol>> axes_;
    std::vector<std::size_t> strides_;
    std::vector<double> probs_;
};

/// Conditional mutual information I(left; right | cond) in bits by exact
/// summation. Axes not listed anywhere are marginalized out. Throws
/// AxisOverlap if the three groups intersect.
double mutual_information(const JointDist& joint, const std::vector<std::size_t>& left_axes,
                          const std::vector<std::size_t>& right_axes,
                          const std::vector<std::size_t>& cond_axes = {});

enum class Tail { Above, Below };

/// Exact law of a sum of n iid copies of a finite real-valued atom
/// distribution.
class IidSumDist {
public:
    const std::vector<double>& values() const { return values_; }
    const std::vector<double>& probs() const { return probs_; }
    int n() const { return n_; }

    /// P(S > t) or P(S < t); values within kAtomMerge of t count as equal to
    /// t and are excluded from both tails.
    double tail_probability(double threshold, Tail direction) const;

private:
    friend IidSumDist iid_sum_law(const std::vector<double>&, const std::vector<double>&,
                                  int, std::size_t);
    std::vector<double> values_;
    std::vector<double> probs_;
    int n_ = 0;
};

/// n-fold self-convolution with atom merging at absolute tolerance
/// tol::kAtomMerge. Throws Overflow if the working support would exceed
/// atom_cap.
IidSumDist iid_sum_law(const std::vector<double>& atom_values,
                       const std::vector<double>& atom_probs, int n,
                       std::size_t atom_cap = 10'000'000);

}  // namespace covertkey

#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "covertkey/dist.hpp"

namespace covertkey {

/// Weight split and low-weight amplitude of the covert input process:
/// Q_{X_i}(meaningful) = rho_i * alpha.
struct CovertConfig {
    double rho1;
    double rho2;
    double alpha;

    CovertConfig(double rho1, double rho2, double alpha);
};

/// Pair of memoryless two-user channels W_{Y|X1X2}, W_{Z|X1X2} with binary
/// inputs and a designated innocent/meaningful symbol per user. Rows are
/// indexed by input levels (a, b) in {0,1}^2 where 0 is the innocent symbol.
class BinaryMacPair {
public:
    BinaryMacPair(std::vector<Symbol> y_alphabet, std::vector<Symbol> z_alphabet,
                  std::array<std::array<std::vector<double>, 2>, 2> w_y,
                  std::array<std::array<std::vector<double>, 2>, 2> w_z,
                  std::array<Symbol, 2> innocent, std::array<Symbol, 2> meaningful);

    const std::vector<Symbol>& y_alphabet() const { return y_alphabet_; }
    const std::vector<Symbol>& z_alphabet() const { return z_alphabet_; }
    std::size_t y_size() const { return y_alphabet_.size(); }
    std::size_t z_size() const { return z_alphabet_.size(); }

    /// Input symbol of a user at a level (0 innocent, 1 meaningful).
    const Symbol& input_symbol(int user, int level) const { return x_sym_[user][level]; }

    double w_y(int a, int b, std::size_t y) const { return w_y_[a][b][y]; }
    double w_z(int a, int b, std::size_t z) const { return w_z_[a][b][z]; }

    /// P_0..P_3 / Q_0..Q_3: output rows indexed 0:(0,0) 1:(1,0) 2:(0,1) 3:(1,1).
    DiscreteDist p(int i) const;
    DiscreteDist q(int i) const;

    static BinaryMacPair load_file(const std::string& path);
    void save_file(const std::string& path) const;
    std::string to_json_string() const;

    /// Built-in numerical-example channels; which is 1 or 2.
    static BinaryMacPair table1_channel(int which);

private:
    static const std::vector<double>& row(
        const std::array<std::array<std::vector<double>, 2>, 2>& table, int i);

    std::vector<Symbol> y_alphabet_, z_alphabet_;
    std::array<std::array<std::vector<double>, 2>, 2> w_y_, w_z_;
    std::array<std::array<Symbol, 2>, 2> x_sym_;  // [user][level]
};

struct ValidationIssue {
    std::string check;
    std::string detail;
};

struct ValidationReport {
    std::vector<ValidationIssue> issues;
    bool ok() const { return issues.empty(); }
    std::string to_string() const;
};

/// Model assumptions: absolute continuity of each P_i, Q_i against the
/// innocent rows, and non-degeneracy of the warden channel: no weight split
/// rho in [0,1] makes rho*(Q_1-Q_0) + (1-rho)*(Q_2-Q_0) vanish, equivalently
/// chi(rho) > 0 everywhere. Returns a report instead of throwing.
ValidationReport validate(const BinaryMacPair& mac, double tol = 1e-9);

/// Covert input laws (Q_{X_1}, Q_{X_2}) with supports {innocent, meaningful}.
std::pair<DiscreteDist, DiscreteDist> input_dists(const BinaryMacPair& mac,
                                                  const CovertConfig& cfg);

/// Induced output laws (Q_Y, Q_Z) under the covert process.
std::pair<DiscreteDist, DiscreteDist> output_dists(const BinaryMacPair& mac,
                                                   const CovertConfig& cfg);

/// Dense joint law of (X1, X2, Y, Z) under the covert process.
/// Axes: 0 = X1, 1 = X2, 2 = Y, 3 = Z.
JointDist covert_joint(const BinaryMacPair& mac, const CovertConfig& cfg);

/// First-order output perturbation zeta(z) = sum_i rho_i (Q_i(z) - Q_0(z)).
double zeta(const BinaryMacPair& mac, double rho1, std::size_t z);
std::vector<double> zeta_all(const BinaryMacPair& mac, double rho1);

/// chi(rho) = sum_z zeta(z)^2 / Q_0(z).
double chi(const BinaryMacPair& mac, double rho1);

/// kappa(rho) = sqrt(2 / chi(rho)); throws DegenerateChannel when chi = 0.
double kappa(const BinaryMacPair& mac, double rho1);

/// Finite-alpha analogues zeta_n(z) = (Q_Z(z) - Q_0(z)) / alpha and the
/// matching chi_n; DomainError at alpha = 0.
double zeta_n(const BinaryMacPair& mac, const CovertConfig& cfg, std::size_t z);
double chi_n(const BinaryMacPair& mac, const CovertConfig& cfg);

/// Default amplitude schedule alpha_n = 1 / (log2(n) sqrt(n)), n >= 2.
double alpha_schedule(int n);

/// Marginal channel W_{Y|X_S} (or Z) with the users outside keep_mask
/// averaged under the covert input law. Table indexed [x1 level][x2 level][y];
/// levels of averaged-out users are ignored. keep_mask bit0 = user 1,
/// bit1 = user 2.
std::array<std::array<std::vector<double>, 2>, 2> marginal_channel_y(
    const BinaryMacPair& mac, const CovertConfig& cfg, int keep_mask);
std::array<std::array<std::vector<double>, 2>, 2> marginal_channel_z(
    const BinaryMacPair& mac, const CovertConfig& cfg, int keep_mask);

/// One Taylor-expansion record: exact value, first-order prediction, residual.
struct MiExpansion {
    double exact = 0.0;
    double prediction = 0.0;
    double residual = 0.0;
};

/// Per-subset-T slice of the expansion report. subset_mask bit0 = user 1.
struct SubsetExpansion {
    int subset_mask = 0;
    std::string label;
    MiExpansion mi_y;   // I(X_T; Y | X_Tc) vs sum rho_t alpha D(P_t||P_0)
    MiExpansion mi_z;   // I(X_T; Z)        vs sum rho_t alpha D(Q_t||Q_0)
    MiExpansion mi_yz;  // I(X_T; Y,Z|X_Tc) vs sum rho_t alpha (D_P + D_Q)
    double var_y = 0.0;  // per-symbol Var log2 W_{Y|X_U}/W_{Y|X_Tc}
    double var_z = 0.0;  // per-symbol Var log2 W_{Z|X_T}/Q_Z
    double dev_y = 0.0;  // max |log-ratio - I| over positive-probability cells
    double dev_z = 0.0;
};

/// Exact verification data for the small-alpha expansions. The divergence
/// prediction uses the base-correct quadratic coefficient alpha^2 chi_n /
/// (2 ln 2) in bits: the 1/2 constant of the Taylor expansion is exact in
/// nats, and chi-squared carries no log base.
struct ExpansionReport {
    double alpha = 0.0;
    double chi_n_value = 0.0;
    MiExpansion divergence;  // D(Q_Z || Q_0) in bits
    std::array<SubsetExpansion, 3> subsets;  // T = {1}, {2}, {1,2}
};

ExpansionReport expansion_report(const BinaryMacPair& mac, const CovertConfig& cfg);

}  // namespace covertkey

#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "covertkey/mac.hpp"
#include "covertkey/rng.hpp"

namespace covertkey {

struct Mus {
    double mu1 = 0.1;  // reliability slack, in (0, 1)
    double mu2 = 0.1;  // resolvability slack, > 0
    double mu3 = 0.1;  // source-simulation slack, > 0
};

/// Per-user table sizes: G public-message values, M key values, N local
/// randomness values.
struct UserSizes {
    long g = 1;
    long m = 1;
    long n_rand = 1;
};

struct SubsetTargets {
    int subset_mask = 0;    // bit0 = user 1, bit1 = user 2
    double log_mn_cap = 0;  // (1 - mu1) n I(X_T; Y | X_Tc): upper limit on log2(M_T N_T)
    double log_n_floor = 0; // (1 + mu2) n I(X_T; Z):        lower limit on log2(N_T)
};

struct PlanViolation {
    std::string constraint;
    double required = 0.0;
    double actual = 0.0;
};

/// Integer code sizes together with the real-valued targets they were rounded
/// against, and any constraints the rounding failed to preserve.
struct RatePlan {
    int n = 0;
    Mus mu;
    std::array<UserSizes, 2> sizes;
    std::array<SubsetTargets, 3> subsets;   // T = {1}, {2}, {1,2}
    std::array<double, 2> source_floor{};   // (1 + mu3) n H(X_i)
    std::vector<PlanViolation> violations;

    bool feasible() const { return violations.empty(); }
    double log2_mn(int subset_mask) const;
    double log2_n(int subset_mask) const;
    double log2_gmn(int user) const;
};

/// Chooses integer sizes from the subset targets: N up (resolvability needs
/// randomness), M down (reliability caps the product), G up (source
/// simulation needs total mass). Throws InfeasiblePlan when rounding breaks a
/// subset constraint.
RatePlan rate_plan(const BinaryMacPair& mac, const CovertConfig& cfg, int n, Mus mu);

/// Verification-only path: keeps the given sizes and reports violations
/// instead of throwing.
RatePlan plan_from_sizes(const BinaryMacPair& mac, const CovertConfig& cfg, int n, Mus mu,
                         std::array<UserSizes, 2> sizes);

/// Indexed codeword tables f_i(w_i, k_i, j_i) -> X_i^n, symbols drawn iid
/// from the covert input law. Codewords are bit masks (bit t set = meaningful
/// symbol at position t); block lengths up to 64 are supported.
class CodebookPair {
public:
    CodebookPair(std::array<UserSizes, 2> sizes, int n, const CovertConfig& cfg,
                 std::uint64_t seed);

    /// Wraps explicit tables (index order (w, k, j) per user).
    static CodebookPair from_words(std::array<UserSizes, 2> sizes, int n,
                                   std::array<std::vector<std::uint64_t>, 2> words,
                                   std::uint64_t seed = 0);

    int n() const { return n_; }
    std::uint64_t seed() const { return seed_; }
    const std::array<UserSizes, 2>& sizes() const { return sizes_; }
    long entries(int user) const;
    long index_of(int user, long w, long k, long j) const;

    std::uint64_t word(int user, long w, long k, long j) const;
    int level(int user, long w, long k, long j, int pos) const;

    /// Distinct codewords of one user with their multiplicities.
    std::vector<std::pair<std::uint64_t, long>> distinct_words(int user) const;

    /// Preimage of a sequence: indices (w, k, j) with f(w,k,j) = x.
    std::vector<long> preimage(int user, std::uint64_t x) const;

    void unpack_index(int user, long index, long& w, long& k, long& j) const;

private:
    void build_index();

    std::array<UserSizes, 2> sizes_;
    int n_;
    std::uint64_t seed_;
    std::array<std::vector<std::uint64_t>, 2> words_;
    std::array<std::unordered_map<std::uint64_t, std::vector<long>>, 2> preimages_;
};

CodebookPair sample_codebooks(const RatePlan& plan, const CovertConfig& cfg,
                              std::uint64_t seed);

enum class Decoder { KeyPosterior, JointMl };

std::string decoder_name(Decoder d);

/// Enumeration budget in terms; overridden by the COVERTKEY_BUDGET
/// environment variable when set.
double default_budget();

struct SimReport {
    enum class Mode { Exact, MonteCarlo };
    Mode mode = Mode::Exact;
    std::string decoder;
    long trials = 0;

    // Exact mode: p_err is the auxiliary-problem error probability and
    // p_err_protocol the exact error of the key-generation protocol
    // (empty-preimage events included). Monte Carlo mode: p_err estimates the
    // protocol error; halfwidth is the 95% Wilson interval.
    double p_err = 0.0;
    double p_err_halfwidth = 0.0;
    double p_err_protocol = std::numeric_limits<double>::quiet_NaN();

    double secrecy_tv = std::numeric_limits<double>::quiet_NaN();
    bool secrecy_tv_is_bound = false;  // reported value is aux TV + source TVs
    double secrecy_kl = std::numeric_limits<double>::quiet_NaN();  // bits

    double source_tv_1 = std::numeric_limits<double>::quiet_NaN();
    double source_tv_2 = std::numeric_limits<double>::quiet_NaN();
    double covertness_kl = std::numeric_limits<double>::quiet_NaN();  // bits

    long empty_preimage_events = 0;
    // Exact mode: total probability of an empty-preimage event per run.
    double empty_preimage_prob = std::numeric_limits<double>::quiet_NaN();
};

struct AuxRoundResult {
    std::vector<std::uint8_t> y;
    std::vector<std::uint8_t> z;
    long khat1 = 0;
    long khat2 = 0;
};

/// Charlie's decision rule given the observed block and both public indices.
/// KeyPosterior maximizes the exact key posterior marginalized over the
/// randomness indices; JointMl takes the modal (k, j) tuple. Ties break
/// toward the smallest indices in scan order.
std::pair<long, long> decode_keys(const CodebookPair& cb, const BinaryMacPair& mac,
                                  const std::vector<std::uint8_t>& y, long w1, long w2,
                                  Decoder decoder = Decoder::KeyPosterior);

/// One pass of the auxiliary coding problem: encode, transmit, decode.
AuxRoundResult aux_round(const CodebookPair& cb, const BinaryMacPair& mac, long w1, long w2,
                         long k1, long j1, long k2, long j2, std::uint64_t seed,
                         Decoder decoder = Decoder::KeyPosterior);

/// Full enumeration of the auxiliary metrics (error probability, secrecy TV
/// and KL, per-user source TV) plus the exact protocol error. Throws
/// BudgetExceeded when G M1 N1 M2 N2 |Y|^n |Z|^n exceeds the budget.
SimReport exact_metrics(const CodebookPair& cb, const BinaryMacPair& mac,
                        const CovertConfig& cfg, Decoder decoder = Decoder::KeyPosterior,
                        double budget = default_budget());

/// Exact TV between the protocol law of (K1, K2, W, Z) and
/// unif x unif x unif x Q_Z^n, fallback events included. Enumerates both user
/// sequence spaces; gated by budget.
double exact_protocol_secrecy_tv(const CodebookPair& cb, const BinaryMacPair& mac,
                                 const CovertConfig& cfg, double budget = default_budget());

/// Auxiliary decode-error probability alone, gated by its own enumeration
/// cost G M1 N1 M2 N2 |Y|^n. Cheaper than exact_metrics when only the
/// reliability side is needed (bound-validation ensembles).
double exact_error_probability(const CodebookPair& cb, const BinaryMacPair& mac,
                               Decoder decoder = Decoder::KeyPosterior,
                               double budget = default_budget());

/// Exact TV(P-tilde_{X_i}, Q_{X_i}^n) for one user; cheap (codebook-sized).
double exact_source_tv(const CodebookPair& cb, const CovertConfig& cfg, int user);

struct TrialRecord {
    std::uint64_t x1 = 0, x2 = 0;
    std::vector<std::uint8_t> y, z;
    long w1 = 0, k1 = 0, j1 = 0;
    long w2 = 0, k2 = 0, j2 = 0;
    long khat1 = 0, khat2 = 0;
    bool empty_preimage_1 = false, empty_preimage_2 = false;

    bool failure() const {
        return empty_preimage_1 || empty_preimage_2 || khat1 != k1 || khat2 != k2;
    }
};

/// One run of the likelihood-encoder protocol: sample X_i ~ Q^n, send them
/// through both channels, sample (W_i, K_i, J_i) uniformly from the preimage
/// (empty preimage falls back to (1,1,1) and is flagged), decode keys from
/// (Y, W).
TrialRecord protocol_run(const CodebookPair& cb, const BinaryMacPair& mac,
                         const CovertConfig& cfg, const CounterRng& rng, std::uint64_t trial,
                         Decoder decoder = Decoder::KeyPosterior);

/// Monte Carlo protocol metrics. Secrecy is exact when the budget allows the
/// sequence-space enumeration, otherwise the auxiliary TV plus both source
/// TVs is reported as an upper bound; covertness is n D(Q_Z || Q_0) exactly.
SimReport protocol_metrics(const CodebookPair& cb, const BinaryMacPair& mac,
                           const CovertConfig& cfg, long trials, std::uint64_t seed,
                           Decoder decoder = Decoder::KeyPosterior,
                           double budget = default_budget());

double wilson_halfwidth(double phat, long n, double zscore);

struct Lemma3Term {
    int subset_mask = 0;
    double exp_term = 0.0;
    double prob_term = 0.0;
};

struct Lemma3Breakdown {
    double total = 0.0;
    double prefactor = 1.0;  // resolvability only; 1 for reliability
    double mu_used = 0.0;
    std::array<Lemma3Term, 3> terms;
};

/// Non-asymptotic reliability bound: sum over T of 2^{-gamma_T} M_T N_T plus
/// the exact probability that the n-fold log-likelihood sum falls below
/// gamma_T. The threshold parameter is optimized over a grid inside
/// (0, mu1).
Lemma3Breakdown lemma3_reliability(const RatePlan& plan, const BinaryMacPair& mac,
                                   const CovertConfig& cfg);
double lemma3_reliability_rhs(const RatePlan& plan, const BinaryMacPair& mac,
                              const CovertConfig& cfg);

/// Non-asymptotic resolvability bound with the n log2(2^U / (prod (1 - rho_u
/// alpha) v_min)) prefactor on the probability terms, v_min = min_z Q_0(z).
Lemma3Breakdown lemma3_resolvability(const RatePlan& plan, const BinaryMacPair& mac,
                                     const CovertConfig& cfg);
double lemma3_resolvability_rhs(const RatePlan& plan, const BinaryMacPair& mac,
                                const CovertConfig& cfg);

/// Bernstein tail bound exp(-(t^2/2) / (variance_sum + c t / 3)).
double bernstein_bound(double atom_bound_c, double variance_sum, double t);

/// Hoeffding two-sided bound exp(-2 v^2 / sum (b_i - a_i)^2).
double hoeffding_bound(const std::vector<std::pair<double, double>>& ranges, double v);

/// One-shot resolvability bound P(sum log2 1/Q(X_i) >= gamma) + sqrt(2^gamma / m)
/// with the probability term evaluated exactly.
double oneshot_resolvability_bound(double gamma, double m, const DiscreteDist& source,
                                   int n);

struct DecayRow {
    int n = 0;
    double alpha = 0.0;
    double n_alpha = 0.0;
    std::array<UserSizes, 2> sizes;
    double p_err = 0.0;
    double p_err_halfwidth = 0.0;
    double secrecy_tv = std::numeric_limits<double>::quiet_NaN();
    bool secrecy_tv_is_bound = false;
    double source_tv_1 = 0.0, source_tv_2 = 0.0, source_tv = 0.0;
    double covertness_kl = 0.0;
};

struct FitResult {
    double slope = 0.0;
    double intercept = 0.0;
    double rms_residual = 0.0;
    bool valid = false;
};

struct DecayStudy {
    std::vector<DecayRow> rows;
    FitResult fit_p_err;
    FitResult fit_source_tv;
    FitResult fit_secrecy_tv;
};

struct DecayOptions {
    long m = 2;        // per-user key count, fixed across n
    long n_rand = 2;   // per-user randomness count, fixed across n
    int codebooks = 10;  // ensemble size per n; metrics are ensemble means
    // Sequence-space enumeration cap for the exact protocol secrecy column;
    // rows beyond it fall back to the auxiliary-TV + source-TV bound.
    double secrecy_exact_terms_cap = 1e6;
};

/// Runs the pipeline per block length with G_i grown from the
/// source-simulation floor, estimates the metrics over a codebook ensemble,
/// and fits log2(metric) against n * alpha_n.
DecayStudy decay_study(const BinaryMacPair& mac,
                       const std::function<double(int)>& schedule,
                       const std::vector<int>& n_list, Mus mu, double rho1,
                       long trials_per_n, std::uint64_t seed,
                       DecayOptions options = {}, double budget = default_budget());

/// Least-squares fit of log2(y) against x; points with y <= 0 are dropped.
FitResult fit_log2_line(const std::vector<double>& x, const std::vector<double>& y);

// Serialization (full precision). Plan JSON embeds the seed when provided.
std::string sim_report_to_json(const SimReport& report);
std::string sim_report_to_csv(const SimReport& report);
std::string rate_plan_to_json(const RatePlan& plan, std::uint64_t seed);
std::string decay_study_to_json(const DecayStudy& study, std::uint64_t seed);
void write_decay_csv(const std::string& path, const DecayStudy& study);

}  // namespace covertkey

#include "covertkey/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_map>

#include <json.hpp>

#include "covertkey/errors.hpp"

namespace covertkey {

namespace {

constexpr int kSubsetMasks[3] = {1, 2, 3};
constexpr double kRoundEps = 1e-9;
constexpr long kMaxPlannedSize = 1L << 40;

struct SubsetInfo {
    double i_y[4];  // I(X_T; Y | X_Tc) indexed by mask
    double i_z[4];  // I(X_T; Z)
    double h[2];    // H(X_i)
};

SubsetInfo subset_info(const BinaryMacPair& mac, const CovertConfig& cfg) {
    JointDist joint = covert_joint(mac, cfg);
    SubsetInfo info{};
    info.i_y[1] = mutual_information(joint, {0}, {2}, {1});
    info.i_y[2] = mutual_information(joint, {1}, {2}, {0});
    info.i_y[3] = mutual_information(joint, {0, 1}, {2}, {});
    info.i_z[1] = mutual_information(joint, {0}, {3}, {});
    info.i_z[2] = mutual_information(joint, {1}, {3}, {});
    info.i_z[3] = mutual_information(joint, {0, 1}, {3}, {});
    info.h[0] = binary_entropy(cfg.rho1 * cfg.alpha);
    info.h[1] = binary_entropy(cfg.rho2 * cfg.alpha);
    return info;
}

long ceil_size(double log2_value) {
    double v = std::exp2(log2_value);
    if (v > static_cast<double>(kMaxPlannedSize))
        throw InfeasiblePlan("rate_plan: required table size exceeds 2^40");
    return std::max(1L, static_cast<long>(std::ceil(v - kRoundEps)));
}

void fill_targets(RatePlan& plan, const SubsetInfo& info) {
    for (int i = 0; i < 3; ++i) {
        int mask = kSubsetMasks[i];
        plan.subsets[i].subset_mask = mask;
        plan.subsets[i].log_mn_cap = (1.0 - plan.mu.mu1) * plan.n * info.i_y[mask];
        plan.subsets[i].log_n_floor = (1.0 + plan.mu.mu2) * plan.n * info.i_z[mask];
    }
    for (int u = 0; u < 2; ++u)
        plan.source_floor[u] = (1.0 + plan.mu.mu3) * plan.n * info.h[u];
}

void verify_plan(RatePlan& plan) {
    plan.violations.clear();
    for (int i = 0; i < 3; ++i) {
        const auto& t = plan.subsets[i];
        double log_mn = plan.log2_mn(t.subset_mask);
        double log_n = plan.log2_n(t.subset_mask);
        std::string label = t.subset_mask == 3 ? "{1,2}" : (t.subset_mask == 1 ? "{1}" : "{2}");
        if (log_mn > t.log_mn_cap + kRoundEps)
            plan.violations.push_back(
                {"log2(M_T N_T) <= (1-mu1) n I(X_T;Y|X_Tc) for T=" + label, t.log_mn_cap,
                 log_mn});
        if (log_n < t.log_n_floor - kRoundEps)
            plan.violations.push_back(
                {"log2(N_T) >= (1+mu2) n I(X_T;Z) for T=" + label, t.log_n_floor, log_n});
    }
    for (int u = 0; u < 2; ++u) {
        double log_gmn = plan.log2_gmn(u);
        if (log_gmn < plan.source_floor[u] - kRoundEps)
            plan.violations.push_back(
                {"log2(G_i N_i M_i) >= (1+mu3) n H(X_i) for i=" + std::to_string(u + 1),
                 plan.source_floor[u], log_gmn});
    }
}

}  // namespace

double RatePlan::log2_mn(int subset_mask) const {
    double s = 0.0;
    for (int u = 0; u < 2; ++u)
        if (subset_mask & (1 << u))
            s += std::log2(static_cast<double>(sizes[u].m) * sizes[u].n_rand);
    return s;
}

double RatePlan::log2_n(int subset_mask) const {
    double s = 0.0;
    for (int u = 0; u < 2; ++u)
        if (subset_mask & (1 << u)) s += std::log2(static_cast<double>(sizes[u].n_rand));
    return s;
}

double RatePlan::log2_gmn(int user) const {
    return std::log2(static_cast<double>(sizes[user].g) * sizes[user].m *
                     sizes[user].n_rand);
}

RatePlan rate_plan(const BinaryMacPair& mac, const CovertConfig& cfg, int n, Mus mu) {
    if (n < 1) throw DomainError("rate_plan: n must be >= 1");
    if (!(mu.mu1 > 0.0 && mu.mu1 < 1.0) || mu.mu2 <= 0.0 || mu.mu3 <= 0.0)
        throw DomainError("rate_plan: require mu1 in (0,1), mu2 > 0, mu3 > 0");

    RatePlan plan;
    plan.n = n;
    plan.mu = mu;
    SubsetInfo info = subset_info(mac, cfg);
    fill_targets(plan, info);

    for (int u = 0; u < 2; ++u) {
        const double n_floor = plan.subsets[u].log_n_floor;  // subsets[0]={1}, [1]={2}
        long n_i = ceil_size(n_floor);
        const double mn_cap = plan.subsets[u].log_mn_cap;
        long m_i = std::max(
            1L, static_cast<long>(std::floor(std::exp2(mn_cap) / n_i + kRoundEps)));
        plan.sizes[u] = {1, m_i, n_i};
    }
    // Per-user saturation can overshoot the sum constraint (the pentagon's
    // diagonal face); shed key values until it holds or both M hit 1.
    while (plan.log2_mn(3) > plan.subsets[2].log_mn_cap + kRoundEps &&
           (plan.sizes[0].m > 1 || plan.sizes[1].m > 1)) {
        int u = plan.sizes[0].m >= plan.sizes[1].m ? 0 : 1;
        if (plan.sizes[u].m <= 1) u = 1 - u;
        --plan.sizes[u].m;
    }
    for (int u = 0; u < 2; ++u) {
        const auto& s = plan.sizes[u];
        plan.sizes[u].g = std::max(
            1L, static_cast<long>(std::ceil(
                    std::exp2(plan.source_floor[u]) /
                        (static_cast<double>(s.n_rand) * s.m) -
                    kRoundEps)));
    }
    verify_plan(plan);
    if (!plan.feasible()) {
        std::ostringstream os;
        os << "rate_plan: rounding broke " << plan.violations.size()
           << " constraint(s); first: " << plan.violations.front().constraint
           << " (required " << plan.violations.front().required << ", actual "
           << plan.violations.front().actual << "); enlarge n or adjust mu";
        throw InfeasiblePlan(os.str());
    }
    return plan;
}

RatePlan plan_from_sizes(const BinaryMacPair& mac, const CovertConfig& cfg, int n, Mus mu,
                         std::array<UserSizes, 2> sizes) {
    if (n < 1) throw DomainError("plan_from_sizes: n must be >= 1");
    RatePlan plan;
    plan.n = n;
    plan.mu = mu;
    plan.sizes = sizes;
    fill_targets(plan, subset_info(mac, cfg));
    verify_plan(plan);
    return plan;
}

CodebookPair::CodebookPair(std::array<UserSizes, 2> sizes, int n, const CovertConfig& cfg,
                           std::uint64_t seed)
    : sizes_(sizes), n_(n), seed_(seed) {
    if (n < 1 || n > 64) throw DomainError("CodebookPair: block length must be in [1, 64]");
    CounterRng rng(seed);
    const double weight[2] = {cfg.rho1 * cfg.alpha, cfg.rho2 * cfg.alpha};
    const std::uint64_t stream[2] = {streams::kCodebookUser1, streams::kCodebookUser2};
    for (int u = 0; u < 2; ++u) {
        long count = entries(u);
        words_[u].assign(count, 0);
        for (long idx = 0; idx < count; ++idx) {
            std::uint64_t word = 0;
            for (int pos = 0; pos < n_; ++pos) {
                double uni = rng.uniform(stream[u],
                                         static_cast<std::uint64_t>(idx) * n_ + pos);
                if (uni < weight[u]) word |= (1ULL << pos);
            }
            words_[u][idx] = word;
        }
    }
    build_index();
}

void CodebookPair::build_index() {
    for (int u = 0; u < 2; ++u) {
        preimages_[u].clear();
        for (long idx = 0; idx < static_cast<long>(words_[u].size()); ++idx)
            preimages_[u][words_[u][idx]].push_back(idx);
    }
}

CodebookPair CodebookPair::from_words(std::array<UserSizes, 2> sizes, int n,
                                      std::array<std::vector<std::uint64_t>, 2> words,
                                      std::uint64_t seed) {
    CovertConfig zero(0.5, 0.5, 0.0);
    CodebookPair cb(sizes, n, zero, seed);
    for (int u = 0; u < 2; ++u) {
        if (static_cast<long>(words[u].size()) != cb.entries(u))
            throw DomainError("CodebookPair::from_words: table size mismatch");
        cb.words_[u] = std::move(words[u]);
    }
    cb.build_index();
    return cb;
}

long CodebookPair::entries(int user) const {
    const UserSizes& s = sizes_[user];
    return s.g * s.m * s.n_rand;
}

long CodebookPair::index_of(int user, long w, long k, long j) const {
    const UserSizes& s = sizes_[user];
    if (w < 0 || w >= s.g || k < 0 || k >= s.m || j < 0 || j >= s.n_rand)
        throw DomainError("CodebookPair: index out of range");
    return (w * s.m + k) * s.n_rand + j;
}

std::uint64_t CodebookPair::word(int user, long w, long k, long j) const {
    return words_[user][index_of(user, w, k, j)];
}

int CodebookPair::level(int user, long w, long k, long j, int pos) const {
    return static_cast<int>((word(user, w, k, j) >> pos) & 1ULL);
}

std::vector<std::pair<std::uint64_t, long>> CodebookPair::distinct_words(int user) const {
    std::map<std::uint64_t, long> counts;
    for (std::uint64_t w : words_[user]) ++counts[w];
    return {counts.begin(), counts.end()};
}

std::vector<long> CodebookPair::preimage(int user, std::uint64_t x) const {
    auto it = preimages_[user].find(x);
    return it == preimages_[user].end() ? std::vector<long>{} : it->second;
}

void CodebookPair::unpack_index(int user, long index, long& w, long& k, long& j) const {
    const UserSizes& s = sizes_[user];
    j = index % s.n_rand;
    index /= s.n_rand;
    k = index % s.m;
    w = index / s.m;
}

CodebookPair sample_codebooks(const RatePlan& plan, const CovertConfig& cfg,
                              std::uint64_t seed) {
    return CodebookPair(plan.sizes, plan.n, cfg, seed);
}

std::string decoder_name(Decoder d) {
    return d == Decoder::KeyPosterior ? "key-posterior" : "joint-ml";
}

double default_budget() {
    if (const char* env = std::getenv("COVERTKEY_BUDGET")) {
        char* end = nullptr;
        double v = std::strtod(env, &end);
        if (end != env && v > 0.0) return v;
    }
    return 1e8;
}

double wilson_halfwidth(double phat, long n, double z) {
    if (n <= 0) throw DomainError("wilson_halfwidth: n must be positive");
    double zz = z * z;
    double denom = 1.0 + zz / n;
    return z * std::sqrt(phat * (1.0 - phat) / n + zz / (4.0 * n * n)) / denom;
}

namespace {

double q_n_prob(std::uint64_t word, int n, double weight) {
    int pop = static_cast<int>(__builtin_popcountll(word));
    return std::pow(weight, pop) * std::pow(1.0 - weight, n - pop);
}

}  // namespace

std::pair<long, long> decode_keys(const CodebookPair& cb, const BinaryMacPair& mac,
                                  const std::vector<std::uint8_t>& y, long w1, long w2,
                                  Decoder decoder) {
    const auto& s1 = cb.sizes()[0];
    const auto& s2 = cb.sizes()[1];
    const int n = cb.n();
    long best_k1 = 0, best_k2 = 0;
    double best = -1.0;
    if (decoder == Decoder::KeyPosterior) {
        for (long k1 = 0; k1 < s1.m; ++k1) {
            for (long k2 = 0; k2 < s2.m; ++k2) {
                double post = 0.0;
                for (long j1 = 0; j1 < s1.n_rand; ++j1) {
                    std::uint64_t c1 = cb.word(0, w1, k1, j1);
                    for (long j2 = 0; j2 < s2.n_rand; ++j2) {
                        std::uint64_t c2 = cb.word(1, w2, k2, j2);
                        double lik = 1.0;
                        for (int t = 0; t < n; ++t)
                            lik *= mac.w_y(static_cast<int>((c1 >> t) & 1),
                                           static_cast<int>((c2 >> t) & 1), y[t]);
                        post += lik;
                    }
                }
                if (post > best) {
                    best = post;
                    best_k1 = k1;
                    best_k2 = k2;
                }
            }
        }
    } else {
        for (long k1 = 0; k1 < s1.m; ++k1) {
            for (long j1 = 0; j1 < s1.n_rand; ++j1) {
                std::uint64_t c1 = cb.word(0, w1, k1, j1);
                for (long k2 = 0; k2 < s2.m; ++k2) {
                    for (long j2 = 0; j2 < s2.n_rand; ++j2) {
                        std::uint64_t c2 = cb.word(1, w2, k2, j2);
                        double lik = 1.0;
                        for (int t = 0; t < n; ++t)
                            lik *= mac.w_y(static_cast<int>((c1 >> t) & 1),
                                           static_cast<int>((c2 >> t) & 1), y[t]);
                        if (lik > best) {
                            best = lik;
                            best_k1 = k1;
                            best_k2 = k2;
                        }
                    }
                }
            }
        }
    }
    return {best_k1, best_k2};
}

namespace {

/// Odometer over sequences of a given alphabet size; returns false at wrap.
bool advance(std::vector<std::uint8_t>& seq, std::size_t alphabet) {
    for (std::size_t t = seq.size(); t-- > 0;) {
        if (++seq[t] < alphabet) return true;
        seq[t] = 0;
    }
    return false;
}

double pow_size(std::size_t base, int n) {
    return std::pow(static_cast<double>(base), n);
}

struct SecrecyValues {
    double tv = 0.0;
    double kl = 0.0;
};

/// TV and KL of the auxiliary (K1, K2, W, Z) law against
/// unif x unif x unif x Q_Z^n, by full enumeration.
SecrecyValues aux_secrecy(const CodebookPair& cb, const BinaryMacPair& mac,
                          const CovertConfig& cfg) {
    const auto& s1 = cb.sizes()[0];
    const auto& s2 = cb.sizes()[1];
    const int n = cb.n();
    const std::size_t zc = mac.z_size();
    auto [qy, qz] = output_dists(mac, cfg);
    (void)qy;

    const double tuples = static_cast<double>(s1.g) * s1.m * s1.n_rand * s2.g * s2.m *
                          s2.n_rand;
    const double ref_kw = 1.0 / (static_cast<double>(s1.g) * s1.m * s2.g * s2.m);

    SecrecyValues out;
    std::vector<double> zdist;
    for (long w1 = 0; w1 < s1.g; ++w1) {
        for (long w2 = 0; w2 < s2.g; ++w2) {
            for (long k1 = 0; k1 < s1.m; ++k1) {
                for (long k2 = 0; k2 < s2.m; ++k2) {
                    zdist.assign(static_cast<std::size_t>(pow_size(zc, n)), 0.0);
                    for (long j1 = 0; j1 < s1.n_rand; ++j1) {
                        std::uint64_t c1 = cb.word(0, w1, k1, j1);
                        for (long j2 = 0; j2 < s2.n_rand; ++j2) {
                            std::uint64_t c2 = cb.word(1, w2, k2, j2);
                            std::vector<std::uint8_t> z(n, 0);
                            std::size_t flat = 0;
                            do {
                                double p = 1.0;
                                for (int t = 0; t < n; ++t)
                                    p *= mac.w_z(static_cast<int>((c1 >> t) & 1),
                                                 static_cast<int>((c2 >> t) & 1), z[t]);
                                zdist[flat++] += p;
                            } while (advance(z, zc));
                        }
                    }
                    std::vector<std::uint8_t> z(n, 0);
                    std::size_t flat = 0;
                    do {
                        double p_tilde = zdist[flat++] / tuples;
                        double qzn = 1.0;
                        for (int t = 0; t < n; ++t) qzn *= qz[z[t]];
                        double ref = ref_kw * qzn;
                        out.tv += 0.5 * std::fabs(p_tilde - ref);
                        if (p_tilde > 0.0) {
                            if (ref == 0.0)
                                throw AbsoluteContinuityViolation(
                                    "aux secrecy: reference law vanishes on a reachable z");
                            out.kl += p_tilde * std::log2(p_tilde / ref);
                        }
                    } while (advance(z, zc));
                }
            }
        }
    }
    return out;
}

/// Grouped (w, k) posterior of one user's likelihood encoder at sequence x:
/// uniform over the preimage, or the (0,0) fallback when the preimage is
/// empty (second member false).
std::pair<std::vector<std::pair<std::pair<long, long>, double>>, bool> wk_posterior(
    const CodebookPair& cb, int user, std::uint64_t x) {
    std::vector<long> pre = cb.preimage(user, x);
    std::vector<std::pair<std::pair<long, long>, double>> grouped;
    if (pre.empty()) {
        grouped.push_back({{0, 0}, 1.0});
        return {grouped, false};
    }
    std::map<std::pair<long, long>, double> acc;
    for (long idx : pre) {
        long w, k, j;
        cb.unpack_index(user, idx, w, k, j);
        acc[{w, k}] += 1.0 / pre.size();
    }
    grouped.assign(acc.begin(), acc.end());
    return {grouped, true};
}

SecrecyValues protocol_secrecy(const CodebookPair& cb, const BinaryMacPair& mac,
                               const CovertConfig& cfg, double budget) {
    const auto& s1 = cb.sizes()[0];
    const auto& s2 = cb.sizes()[1];
    const int n = cb.n();
    const std::size_t zc = mac.z_size();
    double seq_terms = pow_size(2, n) * pow_size(2, n) * pow_size(zc, n);
    if (seq_terms > budget)
        throw BudgetExceeded("protocol secrecy: sequence enumeration above budget",
                             seq_terms);

    auto [qy, qz] = output_dists(mac, cfg);
    (void)qy;
    const std::size_t z_cells = static_cast<std::size_t>(pow_size(zc, n));
    const std::size_t kw_cells = static_cast<std::size_t>(s1.g) * s2.g * s1.m * s2.m;
    auto kw_offset = [&](long w1, long k1, long w2, long k2) {
        return ((static_cast<std::size_t>(w1) * s1.m + k1) * s2.g + w2) * s2.m + k2;
    };
    std::vector<double> joint(kw_cells * z_cells, 0.0);

    const double weight1 = cfg.rho1 * cfg.alpha, weight2 = cfg.rho2 * cfg.alpha;
    const std::uint64_t top1 = 1ULL << n;
    std::vector<double> wz_cache(z_cells);
    for (std::uint64_t x1 = 0; x1 < top1; ++x1) {
        double q1 = q_n_prob(x1, n, weight1);
        auto [wk1, ok1] = wk_posterior(cb, 0, x1);
        (void)ok1;
        for (std::uint64_t x2 = 0; x2 < top1; ++x2) {
            double q2 = q_n_prob(x2, n, weight2);
            auto [wk2, ok2] = wk_posterior(cb, 1, x2);
            (void)ok2;
            std::vector<std::uint8_t> z(n, 0);
            std::size_t flat = 0;
            do {
                double p = 1.0;
                for (int t = 0; t < n; ++t)
                    p *= mac.w_z(static_cast<int>((x1 >> t) & 1),
                                 static_cast<int>((x2 >> t) & 1), z[t]);
                wz_cache[flat++] = p;
            } while (advance(z, zc));
            double qq = q1 * q2;
            for (const auto& [wk1_pair, u1] : wk1) {
                for (const auto& [wk2_pair, u2] : wk2) {
                    double mass = qq * u1 * u2;
                    double* row = joint.data() +
                                  kw_offset(wk1_pair.first, wk1_pair.second, wk2_pair.first,
                                            wk2_pair.second) *
                                      z_cells;
                    for (std::size_t zf = 0; zf < z_cells; ++zf) row[zf] += mass * wz_cache[zf];
                }
            }
        }
    }

    const double ref_kw = 1.0 / static_cast<double>(kw_cells);
    SecrecyValues out;
    std::vector<double> qzn(z_cells);
    {
        std::vector<std::uint8_t> z(n, 0);
        std::size_t flat = 0;
        do {
            double p = 1.0;
            for (int t = 0; t < n; ++t) p *= qz[z[t]];
            qzn[flat++] = p;
        } while (advance(z, zc));
    }
    for (std::size_t cell = 0; cell < kw_cells; ++cell) {
        for (std::size_t zf = 0; zf < z_cells; ++zf) {
            double p_hat = joint[cell * z_cells + zf];
            double ref = ref_kw * qzn[zf];
            out.tv += 0.5 * std::fabs(p_hat - ref);
            if (p_hat > 0.0) {
                if (ref == 0.0)
                    throw AbsoluteContinuityViolation(
                        "protocol secrecy: reference law vanishes on a reachable z");
                out.kl += p_hat * std::log2(p_hat / ref);
            }
        }
    }
    return out;
}

}  // namespace

double exact_source_tv(const CodebookPair& cb, const CovertConfig& cfg, int user) {
    const int n = cb.n();
    const double weight = (user == 0 ? cfg.rho1 : cfg.rho2) * cfg.alpha;
    const double total = static_cast<double>(cb.entries(user));
    double tv = 0.0, covered = 0.0;
    for (const auto& [word, count] : cb.distinct_words(user)) {
        double q = q_n_prob(word, n, weight);
        tv += 0.5 * std::fabs(count / total - q);
        covered += q;
    }
    return tv + 0.5 * (1.0 - covered);
}

AuxRoundResult aux_round(const CodebookPair& cb, const BinaryMacPair& mac, long w1, long w2,
                         long k1, long j1, long k2, long j2, std::uint64_t seed,
                         Decoder decoder) {
    const int n = cb.n();
    std::uint64_t c1 = cb.word(0, w1, k1, j1);
    std::uint64_t c2 = cb.word(1, w2, k2, j2);
    CounterRng rng(seed);
    Substream ss(rng, streams::kAuxRound);

    AuxRoundResult out;
    out.y.resize(n);
    out.z.resize(n);
    for (int t = 0; t < n; ++t) {
        int a = static_cast<int>((c1 >> t) & 1), b = static_cast<int>((c2 >> t) & 1);
        double u = ss.next_double();
        double acc = 0.0;
        std::uint8_t sym = static_cast<std::uint8_t>(mac.y_size() - 1);
        for (std::size_t y = 0; y < mac.y_size(); ++y) {
            acc += mac.w_y(a, b, y);
            if (u < acc) {
                sym = static_cast<std::uint8_t>(y);
                break;
            }
        }
        out.y[t] = sym;
    }
    for (int t = 0; t < n; ++t) {
        int a = static_cast<int>((c1 >> t) & 1), b = static_cast<int>((c2 >> t) & 1);
        double u = ss.next_double();
        double acc = 0.0;
        std::uint8_t sym = static_cast<std::uint8_t>(mac.z_size() - 1);
        for (std::size_t z = 0; z < mac.z_size(); ++z) {
            acc += mac.w_z(a, b, z);
            if (u < acc) {
                sym = static_cast<std::uint8_t>(z);
                break;
            }
        }
        out.z[t] = sym;
    }
    auto [khat1, khat2] = decode_keys(cb, mac, out.y, w1, w2, decoder);
    out.khat1 = khat1;
    out.khat2 = khat2;
    return out;
}

namespace {

struct AuxErrorOut {
    double p_err = 0.0;
    // Decisions over (w1, w2, y), offset (w1 * G2 + w2) * |Y|^n + yflat.
    std::vector<std::pair<long, long>> decisions;
};

AuxErrorOut aux_error_and_decisions(const CodebookPair& cb, const BinaryMacPair& mac,
                                    Decoder decoder) {
    const auto& s1 = cb.sizes()[0];
    const auto& s2 = cb.sizes()[1];
    const int n = cb.n();
    const std::size_t yc = mac.y_size();
    const std::size_t y_cells = static_cast<std::size_t>(pow_size(yc, n));

    AuxErrorOut out;
    out.decisions.resize(static_cast<std::size_t>(s1.g) * s2.g * y_cells);
    const double tuples = static_cast<double>(s1.g) * s2.g * s1.m * s1.n_rand * s2.m *
                          s2.n_rand;
    double err_mass = 0.0;
    std::vector<double> post(static_cast<std::size_t>(s1.m) * s2.m);
    for (long w1 = 0; w1 < s1.g; ++w1) {
        for (long w2 = 0; w2 < s2.g; ++w2) {
            std::vector<std::uint8_t> y(n, 0);
            std::size_t yflat = 0;
            do {
                std::fill(post.begin(), post.end(), 0.0);
                double best_tuple = -1.0;
                long ml_k1 = 0, ml_k2 = 0;
                for (long k1 = 0; k1 < s1.m; ++k1) {
                    for (long j1 = 0; j1 < s1.n_rand; ++j1) {
                        std::uint64_t c1 = cb.word(0, w1, k1, j1);
                        for (long k2 = 0; k2 < s2.m; ++k2) {
                            for (long j2 = 0; j2 < s2.n_rand; ++j2) {
                                std::uint64_t c2 = cb.word(1, w2, k2, j2);
                                double lik = 1.0;
                                for (int t = 0; t < n; ++t)
                                    lik *= mac.w_y(static_cast<int>((c1 >> t) & 1),
                                                   static_cast<int>((c2 >> t) & 1), y[t]);
                                post[k1 * s2.m + k2] += lik;
                                if (lik > best_tuple) {
                                    best_tuple = lik;
                                    ml_k1 = k1;
                                    ml_k2 = k2;
                                }
                            }
                        }
                    }
                }
                long dk1 = ml_k1, dk2 = ml_k2;
                if (decoder == Decoder::KeyPosterior) {
                    double best = -1.0;
                    for (long k1 = 0; k1 < s1.m; ++k1)
                        for (long k2 = 0; k2 < s2.m; ++k2)
                            if (post[k1 * s2.m + k2] > best) {
                                best = post[k1 * s2.m + k2];
                                dk1 = k1;
                                dk2 = k2;
                            }
                }
                out.decisions[(static_cast<std::size_t>(w1) * s2.g + w2) * y_cells + yflat] =
                    {dk1, dk2};
                for (long k1 = 0; k1 < s1.m; ++k1)
                    for (long k2 = 0; k2 < s2.m; ++k2)
                        if (k1 != dk1 || k2 != dk2) err_mass += post[k1 * s2.m + k2];
                ++yflat;
            } while (advance(y, yc));
        }
    }
    out.p_err = err_mass / tuples;
    return out;
}

}  // namespace

double exact_error_probability(const CodebookPair& cb, const BinaryMacPair& mac,
                               Decoder decoder, double budget) {
    const auto& s1 = cb.sizes()[0];
    const auto& s2 = cb.sizes()[1];
    double terms = static_cast<double>(s1.g) * s2.g * s1.m * s1.n_rand * s2.m * s2.n_rand *
                   pow_size(mac.y_size(), cb.n());
    if (terms > budget)
        throw BudgetExceeded("exact_error_probability: enumeration above budget", terms);
    return aux_error_and_decisions(cb, mac, decoder).p_err;
}

SimReport exact_metrics(const CodebookPair& cb, const BinaryMacPair& mac,
                        const CovertConfig& cfg, Decoder decoder, double budget) {
    const auto& s1 = cb.sizes()[0];
    const auto& s2 = cb.sizes()[1];
    const int n = cb.n();
    const std::size_t yc = mac.y_size(), zc = mac.z_size();

    double terms = static_cast<double>(s1.g) * s2.g * s1.m * s1.n_rand * s2.m * s2.n_rand *
                   pow_size(yc, n) * pow_size(zc, n);
    if (terms > budget)
        throw BudgetExceeded("exact_metrics: enumeration above budget", terms);

    SimReport report;
    report.mode = SimReport::Mode::Exact;
    report.decoder = decoder_name(decoder);

    const std::size_t y_cells = static_cast<std::size_t>(pow_size(yc, n));
    AuxErrorOut aux_err = aux_error_and_decisions(cb, mac, decoder);
    const std::vector<std::pair<long, long>>& decisions = aux_err.decisions;
    auto dec_offset = [&](long w1, long w2, std::size_t yflat) {
        return (static_cast<std::size_t>(w1) * s2.g + w2) * y_cells + yflat;
    };
    report.p_err = aux_err.p_err;

    // Exact protocol error: preimage-sampled indices, channel driven by the
    // Q^n-distributed sequences; empty preimages count as failures outright.
    const double weight1 = cfg.rho1 * cfg.alpha, weight2 = cfg.rho2 * cfg.alpha;
    auto distinct1 = cb.distinct_words(0);
    auto distinct2 = cb.distinct_words(1);
    double covered1 = 0.0, covered2 = 0.0;
    for (const auto& [word, cnt] : distinct1) covered1 += q_n_prob(word, n, weight1);
    for (const auto& [word, cnt] : distinct2) covered2 += q_n_prob(word, n, weight2);
    double fail_union = 1.0 - covered1 * covered2;
    report.empty_preimage_prob = fail_union;

    double proto_err = 0.0;
    for (const auto& [x1, cnt1] : distinct1) {
        double q1 = q_n_prob(x1, n, weight1);
        auto [wk1, ok1] = wk_posterior(cb, 0, x1);
        (void)ok1;
        for (const auto& [x2, cnt2] : distinct2) {
            double q2 = q_n_prob(x2, n, weight2);
            auto [wk2, ok2] = wk_posterior(cb, 1, x2);
            (void)ok2;
            std::vector<std::uint8_t> y(n, 0);
            std::size_t yflat = 0;
            do {
                double wyn = 1.0;
                for (int t = 0; t < n; ++t)
                    wyn *= mac.w_y(static_cast<int>((x1 >> t) & 1),
                                   static_cast<int>((x2 >> t) & 1), y[t]);
                for (const auto& [p1, u1] : wk1) {
                    for (const auto& [p2, u2] : wk2) {
                        const auto& d = decisions[dec_offset(p1.first, p2.first, yflat)];
                        if (d.first != p1.second || d.second != p2.second)
                            proto_err += q1 * q2 * u1 * u2 * wyn;
                    }
                }
                ++yflat;
            } while (advance(y, yc));
        }
    }
    report.p_err_protocol = fail_union + proto_err;

    SecrecyValues sec = aux_secrecy(cb, mac, cfg);
    report.secrecy_tv = sec.tv;
    report.secrecy_kl = sec.kl;
    report.source_tv_1 = exact_source_tv(cb, cfg, 0);
    report.source_tv_2 = exact_source_tv(cb, cfg, 1);

    auto [qy, qz] = output_dists(mac, cfg);
    (void)qy;
    report.covertness_kl = n * kl_divergence(qz, mac.q(0));
    return report;
}

double exact_protocol_secrecy_tv(const CodebookPair& cb, const BinaryMacPair& mac,
                                 const CovertConfig& cfg, double budget) {
    return protocol_secrecy(cb, mac, cfg, budget).tv;
}

TrialRecord protocol_run(const CodebookPair& cb, const BinaryMacPair& mac,
                         const CovertConfig& cfg, const CounterRng& rng, std::uint64_t trial,
                         Decoder decoder) {
    const int n = cb.n();
    const std::uint64_t stride = 4ULL * n + 8;
    Substream ss(rng, streams::kProtocolTrial, trial * stride);

    TrialRecord rec;
    const double weight1 = cfg.rho1 * cfg.alpha, weight2 = cfg.rho2 * cfg.alpha;
    for (int t = 0; t < n; ++t)
        if (ss.next_double() < weight1) rec.x1 |= (1ULL << t);
    for (int t = 0; t < n; ++t)
        if (ss.next_double() < weight2) rec.x2 |= (1ULL << t);

    rec.y.resize(n);
    rec.z.resize(n);
    for (int t = 0; t < n; ++t) {
        int a = static_cast<int>((rec.x1 >> t) & 1), b = static_cast<int>((rec.x2 >> t) & 1);
        double u = ss.next_double();
        double acc = 0.0;
        rec.y[t] = static_cast<std::uint8_t>(mac.y_size() - 1);
        for (std::size_t y = 0; y < mac.y_size(); ++y) {
            acc += mac.w_y(a, b, y);
            if (u < acc) {
                rec.y[t] = static_cast<std::uint8_t>(y);
                break;
            }
        }
    }
    for (int t = 0; t < n; ++t) {
        int a = static_cast<int>((rec.x1 >> t) & 1), b = static_cast<int>((rec.x2 >> t) & 1);
        double u = ss.next_double();
        double acc = 0.0;
        rec.z[t] = static_cast<std::uint8_t>(mac.z_size() - 1);
        for (std::size_t z = 0; z < mac.z_size(); ++z) {
            acc += mac.w_z(a, b, z);
            if (u < acc) {
                rec.z[t] = static_cast<std::uint8_t>(z);
                break;
            }
        }
    }

    auto sample_indices = [&](int user, std::uint64_t x, long& w, long& k, long& j,
                              bool& empty) {
        std::vector<long> pre = cb.preimage(user, x);
        if (pre.empty()) {
            empty = true;
            w = k = j = 0;  // fallback entry, flagged as a failure
            ss.next_double();  // keep the draw count per trial fixed
            return;
        }
        empty = false;
        double u = ss.next_double();
        std::size_t pick = std::min(pre.size() - 1,
                                    static_cast<std::size_t>(u * pre.size()));
        cb.unpack_index(user, pre[pick], w, k, j);
    };
    sample_indices(0, rec.x1, rec.w1, rec.k1, rec.j1, rec.empty_preimage_1);
    sample_indices(1, rec.x2, rec.w2, rec.k2, rec.j2, rec.empty_preimage_2);

    auto [khat1, khat2] = decode_keys(cb, mac, rec.y, rec.w1, rec.w2, decoder);
    rec.khat1 = khat1;
    rec.khat2 = khat2;
    return rec;
}

SimReport protocol_metrics(const CodebookPair& cb, const BinaryMacPair& mac,
                           const CovertConfig& cfg, long trials, std::uint64_t seed,
                           Decoder decoder, double budget) {
    if (trials < 1) throw DomainError("protocol_metrics: trials must be >= 1");

    SimReport report;
    report.mode = SimReport::Mode::MonteCarlo;
    report.decoder = decoder_name(decoder);
    report.trials = trials;

    CounterRng rng(seed);
    long errors = 0;
    for (long trial = 0; trial < trials; ++trial) {
        TrialRecord rec = protocol_run(cb, mac, cfg, rng, trial, decoder);
        if (rec.failure()) ++errors;
        if (rec.empty_preimage_1 || rec.empty_preimage_2) ++report.empty_preimage_events;
    }
    report.p_err = static_cast<double>(errors) / trials;
    report.p_err_halfwidth = wilson_halfwidth(report.p_err, trials, 1.959963984540054);

    report.source_tv_1 = exact_source_tv(cb, cfg, 0);
    report.source_tv_2 = exact_source_tv(cb, cfg, 1);

    try {
        SecrecyValues sec = protocol_secrecy(cb, mac, cfg, budget);
        report.secrecy_tv = sec.tv;
        report.secrecy_kl = sec.kl;
        report.secrecy_tv_is_bound = false;
    } catch (const BudgetExceeded&) {
        // Triangle inequality: protocol TV <= auxiliary TV + both source TVs.
        const auto& s1 = cb.sizes()[0];
        const auto& s2 = cb.sizes()[1];
        double aux_terms = static_cast<double>(s1.g) * s2.g * s1.m * s1.n_rand * s2.m *
                           s2.n_rand * pow_size(mac.z_size(), cb.n());
        if (aux_terms <= budget) {
            report.secrecy_tv =
                aux_secrecy(cb, mac, cfg).tv + report.source_tv_1 + report.source_tv_2;
            report.secrecy_tv_is_bound = true;
        }
    }

    auto [qy, qz] = output_dists(mac, cfg);
    (void)qy;
    report.covertness_kl = cb.n() * kl_divergence(qz, mac.q(0));
    return report;
}

namespace {

struct Atoms {
    std::vector<double> values;
    std::vector<double> probs;
};

void push_atom(Atoms& a, double value, double prob) {
    if (prob <= 0.0) return;
    a.values.push_back(value);
    a.probs.push_back(prob);
}

/// Per-symbol law of log2(W_{Y|X_U} / W_{Y|X_Tc}) under the covert process.
Atoms llr_atoms_y(const BinaryMacPair& mac, const CovertConfig& cfg, int mask) {
    auto cond = marginal_channel_y(mac, cfg, 3 ^ mask);
    const double wx1[2] = {1.0 - cfg.rho1 * cfg.alpha, cfg.rho1 * cfg.alpha};
    const double wx2[2] = {1.0 - cfg.rho2 * cfg.alpha, cfg.rho2 * cfg.alpha};
    Atoms atoms;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (std::size_t y = 0; y < mac.y_size(); ++y) {
                double pr = wx1[a] * wx2[b] * mac.w_y(a, b, y);
                if (pr > 0.0)
                    push_atom(atoms, std::log2(mac.w_y(a, b, y) / cond[a][b][y]), pr);
            }
    return atoms;
}

/// Per-symbol law of log2(W_{Z|X_T} / Q_Z) under the covert process.
Atoms llr_atoms_z(const BinaryMacPair& mac, const CovertConfig& cfg, int mask) {
    auto chan = marginal_channel_z(mac, cfg, mask);
    auto [qy, qz] = output_dists(mac, cfg);
    (void)qy;
    const double wx1[2] = {1.0 - cfg.rho1 * cfg.alpha, cfg.rho1 * cfg.alpha};
    const double wx2[2] = {1.0 - cfg.rho2 * cfg.alpha, cfg.rho2 * cfg.alpha};
    Atoms atoms;
    for (int a = 0; a < 2; ++a) {
        if (!(mask & 1) && a == 1) continue;
        for (int b = 0; b < 2; ++b) {
            if (!(mask & 2) && b == 1) continue;
            double w_in = ((mask & 1) ? wx1[a] : 1.0) * ((mask & 2) ? wx2[b] : 1.0);
            for (std::size_t z = 0; z < mac.z_size(); ++z) {
                double pr = w_in * chan[a][b][z];
                if (pr > 0.0) push_atom(atoms, std::log2(chan[a][b][z] / qz[z]), pr);
            }
        }
    }
    return atoms;
}

Lemma3Breakdown lemma3_bound(const RatePlan& plan, const BinaryMacPair& mac,
                             const CovertConfig& cfg, bool reliability) {
    SubsetInfo info = subset_info(mac, cfg);
    const int n = plan.n;

    std::array<IidSumDist, 3> sums = {
        iid_sum_law(reliability ? llr_atoms_y(mac, cfg, 1).values
                                : llr_atoms_z(mac, cfg, 1).values,
                    reliability ? llr_atoms_y(mac, cfg, 1).probs
                                : llr_atoms_z(mac, cfg, 1).probs,
                    n),
        iid_sum_law(reliability ? llr_atoms_y(mac, cfg, 2).values
                                : llr_atoms_z(mac, cfg, 2).values,
                    reliability ? llr_atoms_y(mac, cfg, 2).probs
                                : llr_atoms_z(mac, cfg, 2).probs,
                    n),
        iid_sum_law(reliability ? llr_atoms_y(mac, cfg, 3).values
                                : llr_atoms_z(mac, cfg, 3).values,
                    reliability ? llr_atoms_y(mac, cfg, 3).probs
                                : llr_atoms_z(mac, cfg, 3).probs,
                    n)};

    double prefactor = 1.0;
    if (!reliability) {
        const DiscreteDist q0 = mac.q(0);
        double v_min = 1.0;
        for (std::size_t z = 0; z < q0.size(); ++z) v_min = std::min(v_min, q0[z]);
        if (v_min <= 0.0)
            throw DomainError("lemma3: v_min = 0, resolvability prefactor undefined");
        prefactor = n * std::log2(4.0 / ((1.0 - cfg.rho1 * cfg.alpha) *
                                         (1.0 - cfg.rho2 * cfg.alpha) * v_min));
    }

    // The bound holds for every threshold slack in (0, mu1) resp. (0, mu2);
    // take the best over a fixed grid.
    const double mu_top = reliability ? plan.mu.mu1 : plan.mu.mu2;
    Lemma3Breakdown best;
    best.total = std::numeric_limits<double>::infinity();
    for (int step = 1; step < 20; ++step) {
        double mu = mu_top * step / 20.0;
        Lemma3Breakdown cur;
        cur.mu_used = mu;
        cur.prefactor = prefactor;
        cur.total = 0.0;
        for (int i = 0; i < 3; ++i) {
            int mask = kSubsetMasks[i];
            Lemma3Term term;
            term.subset_mask = mask;
            if (reliability) {
                double gamma = (1.0 - mu) * n * info.i_y[mask];
                double mn = std::exp2(plan.log2_mn(mask));
                term.exp_term = std::exp2(-gamma) * mn;
                term.prob_term = sums[i].tail_probability(gamma, Tail::Below);
                cur.total += term.exp_term + term.prob_term;
            } else {
                double eta = (1.0 + mu) * n * info.i_z[mask];
                double n_t = std::exp2(plan.log2_n(mask));
                term.exp_term = std::exp2(eta) / n_t;
                term.prob_term = sums[i].tail_probability(eta, Tail::Above);
                cur.total += term.exp_term + prefactor * term.prob_term;
            }
            cur.terms[i] = term;
        }
        if (cur.total < best.total) best = cur;
    }
    return best;
}

}  // namespace

Lemma3Breakdown lemma3_reliability(const RatePlan& plan, const BinaryMacPair& mac,
                                   const CovertConfig& cfg) {
    return lemma3_bound(plan, mac, cfg, true);
}

double lemma3_reliability_rhs(const RatePlan& plan, const BinaryMacPair& mac,
                              const CovertConfig& cfg) {
    return lemma3_reliability(plan, mac, cfg).total;
}

Lemma3Breakdown lemma3_resolvability(const RatePlan& plan, const BinaryMacPair& mac,
                                     const CovertConfig& cfg) {
    return lemma3_bound(plan, mac, cfg, false);
}

double lemma3_resolvability_rhs(const RatePlan& plan, const BinaryMacPair& mac,
                                const CovertConfig& cfg) {
    return lemma3_resolvability(plan, mac, cfg).total;
}

double bernstein_bound(double atom_bound_c, double variance_sum, double t) {
    if (atom_bound_c <= 0.0 || t <= 0.0)
        throw DomainError("bernstein_bound: require c > 0 and t > 0");
    if (variance_sum < 0.0) throw DomainError("bernstein_bound: negative variance");
    return std::exp(-0.5 * t * t / (variance_sum + atom_bound_c * t / 3.0));
}

double hoeffding_bound(const std::vector<std::pair<double, double>>& ranges, double v) {
    if (ranges.empty()) throw DomainError("hoeffding_bound: no variables");
    if (v <= 0.0) throw DomainError("hoeffding_bound: v must be positive");
    double denom = 0.0;
    for (const auto& [lo, hi] : ranges) {
        if (hi < lo) throw DomainError("hoeffding_bound: inverted range");
        denom += (hi - lo) * (hi - lo);
    }
    if (denom == 0.0) throw DomainError("hoeffding_bound: all ranges degenerate");
    return std::exp(-2.0 * v * v / denom);
}

double oneshot_resolvability_bound(double gamma, double m, const DiscreteDist& source,
                                   int n) {
    if (gamma <= 0.0) throw DomainError("oneshot_resolvability_bound: gamma must be > 0");
    if (m < 1.0) throw DomainError("oneshot_resolvability_bound: m must be >= 1");
    std::vector<double> values, probs;
    for (std::size_t i = 0; i < source.size(); ++i) {
        if (source[i] > 0.0) {
            values.push_back(std::log2(1.0 / source[i]));
            probs.push_back(source[i]);
        }
    }
    IidSumDist law = iid_sum_law(values, probs, n);
    double p_ge = 1.0 - law.tail_probability(gamma, Tail::Below);
    return p_ge + std::sqrt(std::exp2(gamma) / m);
}

FitResult fit_log2_line(const std::vector<double>& x, const std::vector<double>& y) {
    FitResult fit;
    std::vector<double> xs, ys;
    for (std::size_t i = 0; i < x.size() && i < y.size(); ++i) {
        if (y[i] > 0.0 && std::isfinite(y[i]) && std::isfinite(x[i])) {
            xs.push_back(x[i]);
            ys.push_back(std::log2(y[i]));
        }
    }
    if (xs.size() < 2) return fit;
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sx += xs[i];
        sy += ys[i];
        sxx += xs[i] * xs[i];
        sxy += xs[i] * ys[i];
    }
    double k = static_cast<double>(xs.size());
    double denom = k * sxx - sx * sx;
    if (denom == 0.0) return fit;
    fit.slope = (k * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / k;
    double rss = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        double r = ys[i] - (fit.intercept + fit.slope * xs[i]);
        rss += r * r;
    }
    fit.rms_residual = std::sqrt(rss / k);
    fit.valid = true;
    return fit;
}

DecayStudy decay_study(const BinaryMacPair& mac, const std::function<double(int)>& schedule,
                       const std::vector<int>& n_list, Mus mu, double rho1,
                       long trials_per_n, std::uint64_t seed, DecayOptions options,
                       double budget) {
    if (n_list.empty()) throw DomainError("decay_study: empty n list");
    if (options.codebooks < 1) throw DomainError("decay_study: need at least one codebook");

    DecayStudy study;
    for (int n : n_list) {
        double alpha = schedule(n);
        CovertConfig cfg(rho1, 1.0 - rho1, alpha);

        DecayRow row;
        row.n = n;
        row.alpha = alpha;
        row.n_alpha = n * alpha;
        for (int u = 0; u < 2; ++u) {
            double h = binary_entropy((u == 0 ? cfg.rho1 : cfg.rho2) * alpha);
            double floor = (1.0 + mu.mu3) * n * h;
            long g = std::max(1L, static_cast<long>(std::ceil(
                                      std::exp2(floor) /
                                          (static_cast<double>(options.n_rand) * options.m) -
                                      kRoundEps)));
            row.sizes[u] = {g, options.m, options.n_rand};
        }

        long trials_cb = std::max(1L, trials_per_n / options.codebooks);
        long errors = 0, trials_total = 0;
        double tv1 = 0.0, tv2 = 0.0, sec = 0.0;
        bool sec_ok = true, sec_bound = false;
        for (int c = 0; c < options.codebooks; ++c) {
            std::uint64_t cb_seed = seed + 0x100003ULL * (c + 1) + 0x1ef7ULL * n;
            CodebookPair cb(row.sizes, n, cfg, cb_seed);
            CounterRng rng(cb_seed ^ 0x5bf03635ULL);
            for (long t = 0; t < trials_cb; ++t)
                if (protocol_run(cb, mac, cfg, rng, t).failure()) ++errors;
            trials_total += trials_cb;
            tv1 += exact_source_tv(cb, cfg, 0);
            tv2 += exact_source_tv(cb, cfg, 1);
            if (sec_ok) {
                try {
                    sec += protocol_secrecy(cb, mac, cfg,
                                            std::min(budget, options.secrecy_exact_terms_cap))
                               .tv;
                } catch (const BudgetExceeded&) {
                    const auto& s1 = cb.sizes()[0];
                    const auto& s2 = cb.sizes()[1];
                    double aux_terms = static_cast<double>(s1.g) * s2.g * s1.m * s1.n_rand *
                                       s2.m * s2.n_rand * pow_size(mac.z_size(), n);
                    if (aux_terms <= std::min(budget, options.secrecy_exact_terms_cap)) {
                        sec += aux_secrecy(cb, mac, cfg).tv + exact_source_tv(cb, cfg, 0) +
                               exact_source_tv(cb, cfg, 1);
                        sec_bound = true;
                    } else {
                        sec_ok = false;
                    }
                }
            }
        }
        row.p_err = static_cast<double>(errors) / trials_total;
        row.p_err_halfwidth = wilson_halfwidth(row.p_err, trials_total, 1.959963984540054);
        row.source_tv_1 = tv1 / options.codebooks;
        row.source_tv_2 = tv2 / options.codebooks;
        row.source_tv = row.source_tv_1 + row.source_tv_2;
        if (sec_ok) {
            row.secrecy_tv = sec / options.codebooks;
            row.secrecy_tv_is_bound = sec_bound;
        }

        auto [qy, qz] = output_dists(mac, cfg);
        (void)qy;
        row.covertness_kl = n * kl_divergence(qz, mac.q(0));
        study.rows.push_back(row);
    }

    std::vector<double> xs, p_err, src, secrecy;
    for (const auto& row : study.rows) {
        xs.push_back(row.n_alpha);
        p_err.push_back(row.p_err);
        src.push_back(row.source_tv);
        secrecy.push_back(row.secrecy_tv);
    }
    study.fit_p_err = fit_log2_line(xs, p_err);
    study.fit_source_tv = fit_log2_line(xs, src);
    study.fit_secrecy_tv = fit_log2_line(xs, secrecy);
    return study;
}

namespace {

nlohmann::json sizes_json(const std::array<UserSizes, 2>& sizes) {
    nlohmann::json out = nlohmann::json::array();
    for (const auto& s : sizes)
        out.push_back({{"G", s.g}, {"M", s.m}, {"N", s.n_rand}});
    return out;
}

}  // namespace

std::string sim_report_to_json(const SimReport& report) {
    nlohmann::json j;
    j["mode"] = report.mode == SimReport::Mode::Exact ? "exact" : "monte_carlo";
    j["decoder"] = report.decoder;
    j["trials"] = report.trials;
    j["p_err"] = report.p_err;
    j["p_err_halfwidth"] = report.p_err_halfwidth;
    j["p_err_protocol"] = report.p_err_protocol;
    j["secrecy_tv"] = report.secrecy_tv;
    j["secrecy_tv_is_bound"] = report.secrecy_tv_is_bound;
    j["secrecy_kl"] = report.secrecy_kl;
    j["source_tv_1"] = report.source_tv_1;
    j["source_tv_2"] = report.source_tv_2;
    j["covertness_kl"] = report.covertness_kl;
    j["empty_preimage_events"] = report.empty_preimage_events;
    j["empty_preimage_prob"] = report.empty_preimage_prob;
    return j.dump(2) + "\n";
}

std::string sim_report_to_csv(const SimReport& report) {
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    std::ostringstream out;
    out << "mode,decoder,trials,p_err,p_err_halfwidth,p_err_protocol,secrecy_tv,"
           "secrecy_tv_is_bound,secrecy_kl,source_tv_1,source_tv_2,covertness_kl,"
           "empty_preimage_events\n";
    out << (report.mode == SimReport::Mode::Exact ? "exact" : "monte_carlo") << ','
        << report.decoder << ',' << report.trials << ',' << fmt(report.p_err) << ','
        << fmt(report.p_err_halfwidth) << ',' << fmt(report.p_err_protocol) << ','
        << fmt(report.secrecy_tv) << ',' << (report.secrecy_tv_is_bound ? 1 : 0) << ','
        << fmt(report.secrecy_kl) << ',' << fmt(report.source_tv_1) << ','
        << fmt(report.source_tv_2) << ',' << fmt(report.covertness_kl) << ','
        << report.empty_preimage_events << '\n';
    return out.str();
}

std::string rate_plan_to_json(const RatePlan& plan, std::uint64_t seed) {
    nlohmann::json j;
    j["n"] = plan.n;
    j["mu"] = {{"mu1", plan.mu.mu1}, {"mu2", plan.mu.mu2}, {"mu3", plan.mu.mu3}};
    j["sizes"] = sizes_json(plan.sizes);
    nlohmann::json subsets = nlohmann::json::array();
    for (const auto& t : plan.subsets)
        subsets.push_back({{"subset_mask", t.subset_mask},
                           {"log_mn_cap", t.log_mn_cap},
                           {"log_n_floor", t.log_n_floor},
                           {"log_mn_actual", plan.log2_mn(t.subset_mask)},
                           {"log_n_actual", plan.log2_n(t.subset_mask)}});
    j["subset_targets"] = subsets;
    j["source_floor"] = plan.source_floor;
    nlohmann::json viols = nlohmann::json::array();
    for (const auto& v : plan.violations)
        viols.push_back(
            {{"constraint", v.constraint}, {"required", v.required}, {"actual", v.actual}});
    j["violations"] = viols;
    j["seed"] = seed;
    return j.dump(2) + "\n";
}

std::string decay_study_to_json(const DecayStudy& study, std::uint64_t seed) {
    nlohmann::json j;
    j["seed"] = seed;
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& row : study.rows) {
        rows.push_back({{"n", row.n},
                        {"alpha", row.alpha},
                        {"n_alpha", row.n_alpha},
                        {"sizes", sizes_json(row.sizes)},
                        {"p_err", row.p_err},
                        {"p_err_halfwidth", row.p_err_halfwidth},
                        {"secrecy_tv", row.secrecy_tv},
                        {"secrecy_tv_is_bound", row.secrecy_tv_is_bound},
                        {"source_tv_1", row.source_tv_1},
                        {"source_tv_2", row.source_tv_2},
                        {"source_tv", row.source_tv},
                        {"covertness_kl", row.covertness_kl}});
    }
    j["rows"] = rows;
    auto fit_json = [](const FitResult& f) {
        return nlohmann::json{{"slope", f.slope},
                              {"intercept", f.intercept},
                              {"rms_residual", f.rms_residual},
                              {"valid", f.valid}};
    };
    j["fit_p_err"] = fit_json(study.fit_p_err);
    j["fit_source_tv"] = fit_json(study.fit_source_tv);
    j["fit_secrecy_tv"] = fit_json(study.fit_secrecy_tv);
    return j.dump(2) + "\n";
}

void write_decay_csv(const std::string& path, const DecayStudy& study) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("write_decay_csv: cannot write '" + path + "'");
    auto fmt = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    out << "n,alpha,n_alpha,p_err,p_err_halfwidth,secrecy_tv,source_tv_1,source_tv_2,"
           "source_tv,covertness_kl\n";
    for (const auto& row : study.rows) {
        out << row.n << ',' << fmt(row.alpha) << ',' << fmt(row.n_alpha) << ','
            << fmt(row.p_err) << ',' << fmt(row.p_err_halfwidth) << ',' << fmt(row.secrecy_tv)
            << ',' << fmt(row.source_tv_1) << ',' << fmt(row.source_tv_2) << ','
            << fmt(row.source_tv) << ',' << fmt(row.covertness_kl) << '\n';
    }
}

}  // namespace covertkey

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "covertkey/errors.hpp"
#include "covertkey/sim.hpp"

using namespace covertkey;

namespace {

const std::array<UserSizes, 2> kTinySizes{{{2, 2, 2}, {2, 2, 2}}};

CovertConfig tiny_cfg() { return CovertConfig(0.28, 0.72, 0.25); }

CodebookPair tiny_codebooks(std::uint64_t seed = 1) {
    return CodebookPair(kTinySizes, 4, tiny_cfg(), seed);
}

BinaryMacPair noiseless_pair() {
    // Y = (X1, X2) on four letters; Z carries nothing.
    std::vector<Symbol> y4{"00", "10", "01", "11"};
    std::array<std::array<std::vector<double>, 2>, 2> wy, wz;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            std::vector<double> row(4, 0.0);
            row[a + 2 * b] = 1.0;
            wy[a][b] = row;
            wz[a][b] = {0.5, 0.5};
        }
    return BinaryMacPair(y4, {"0", "1"}, wy, wz, {"0", "0"}, {"1", "1"});
}

double q_n(std::uint64_t word, int n, double w1) {
    int pop = __builtin_popcountll(word);
    return std::pow(w1, pop) * std::pow(1.0 - w1, n - pop);
}

}  // namespace

TEST_CASE("rate plan at alpha zero") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    RatePlan plan = rate_plan(mac, CovertConfig(0.28, 0.72, 0.0), 8, {0.1, 0.1, 0.1});
    for (int u = 0; u < 2; ++u) {
        CHECK(plan.sizes[u].m == 1);
        CHECK(plan.sizes[u].n_rand == 1);
        CHECK(plan.sizes[u].g == 1);
    }
    CHECK(plan.feasible());
}

TEST_CASE("rate plan infeasible at short blocks") {
    // The resolvability floor forces N = 2 while the reliability cap sits
    // below one bit: no integer sizes exist.
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CHECK_THROWS_AS(rate_plan(mac, CovertConfig(0.28, 0.72, 0.25), 16, {0.1, 0.1, 0.1}),
                    InfeasiblePlan);
}

TEST_CASE("rate plan feasible with keys") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg(0.28, 0.72, 0.25);
    RatePlan plan = rate_plan(mac, cfg, 42, {0.1, 0.1, 0.1});
    CHECK(plan.feasible());
    CHECK(plan.sizes[0].m >= 2);
    CHECK(plan.sizes[1].m >= 2);
    // Recompute every constraint from the returned sizes: slack must be
    // nonnegative in each required direction.
    for (const auto& t : plan.subsets) {
        CHECK(plan.log2_mn(t.subset_mask) <= t.log_mn_cap + 1e-9);
        CHECK(plan.log2_n(t.subset_mask) >= t.log_n_floor - 1e-9);
    }
    for (int u = 0; u < 2; ++u) CHECK(plan.log2_gmn(u) >= plan.source_floor[u] - 1e-9);
}

TEST_CASE("fixed-size verification reports which constraints fail") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    RatePlan plan = plan_from_sizes(mac, tiny_cfg(), 4, {0.1, 0.1, 0.1}, kTinySizes);
    CHECK_FALSE(plan.feasible());
    bool has_reliability = false;
    for (const auto& v : plan.violations)
        if (v.constraint.find("M_T N_T") != std::string::npos) has_reliability = true;
    CHECK(has_reliability);
}

TEST_CASE("codebooks at alpha zero are all-innocent") {
    CovertConfig cfg(0.5, 0.5, 0.0);
    CodebookPair cb(kTinySizes, 6, cfg, 99);
    for (int u = 0; u < 2; ++u)
        for (long idx = 0; idx < cb.entries(u); ++idx) {
            long w, k, j;
            cb.unpack_index(u, idx, w, k, j);
            CHECK(cb.word(u, w, k, j) == 0);
        }
}

TEST_CASE("codebooks are deterministic in the seed") {
    CodebookPair a = tiny_codebooks(7), b = tiny_codebooks(7), c = tiny_codebooks(8);
    bool all_equal = true, any_diff = false;
    for (int u = 0; u < 2; ++u)
        for (long w = 0; w < 2; ++w)
            for (long k = 0; k < 2; ++k)
                for (long j = 0; j < 2; ++j) {
                    if (a.word(u, w, k, j) != b.word(u, w, k, j)) all_equal = false;
                    if (a.word(u, w, k, j) != c.word(u, w, k, j)) any_diff = true;
                }
    CHECK(all_equal);
    CHECK(any_diff);
}

TEST_CASE("codebook symbol frequency within 3 sigma") {
    std::array<UserSizes, 2> sizes{{{4, 4, 4}, {4, 4, 4}}};
    CovertConfig cfg(0.4, 0.6, 0.2);
    CodebookPair cb(sizes, 32, cfg, 1234);
    for (int u = 0; u < 2; ++u) {
        double p = (u == 0 ? 0.4 : 0.6) * 0.2;
        long ones = 0, total = cb.entries(u) * 32;
        for (long idx = 0; idx < cb.entries(u); ++idx) {
            long w, k, j;
            cb.unpack_index(u, idx, w, k, j);
            ones += __builtin_popcountll(cb.word(u, w, k, j));
        }
        double sigma = std::sqrt(p * (1.0 - p) * total);
        CHECK(std::fabs(ones - p * total) <= 3.0 * sigma);
    }
}

TEST_CASE("aux round on a noiseless channel decodes perfectly") {
    BinaryMacPair mac = noiseless_pair();
    CovertConfig cfg(0.5, 0.5, 0.5);
    // Find a seed whose codewords are distinct per user; the identity output
    // then pins the posterior on the transmitted pair.
    for (std::uint64_t seed = 1;; ++seed) {
        REQUIRE(seed < 200);
        CodebookPair cb(kTinySizes, 6, cfg, seed);
        bool distinct = true;
        for (int u = 0; u < 2 && distinct; ++u) {
            std::set<std::uint64_t> seen;
            for (long idx = 0; idx < cb.entries(u); ++idx) {
                long w, k, j;
                cb.unpack_index(u, idx, w, k, j);
                if (!seen.insert(cb.word(u, w, k, j)).second) distinct = false;
            }
        }
        if (!distinct) continue;
        for (long w1 = 0; w1 < 2; ++w1)
            for (long k1 = 0; k1 < 2; ++k1)
                for (long j1 = 0; j1 < 2; ++j1)
                    for (long k2 = 0; k2 < 2; ++k2) {
                        AuxRoundResult r =
                            aux_round(cb, mac, w1, w1, k1, j1, k2, 1 - j1, seed * 31 + k2);
                        CHECK(r.khat1 == k1);
                        CHECK(r.khat2 == k2);
                    }
        break;
    }
}

TEST_CASE("aux round with singleton tables is trivially correct") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    std::array<UserSizes, 2> ones{{{1, 1, 1}, {1, 1, 1}}};
    CodebookPair cb(ones, 4, tiny_cfg(), 5);
    AuxRoundResult r = aux_round(cb, mac, 0, 0, 0, 0, 0, 0, 42);
    CHECK(r.khat1 == 0);
    CHECK(r.khat2 == 0);
}

TEST_CASE("decoder matches a local posterior enumeration") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CodebookPair cb = tiny_codebooks(3);
    const int n = 4;
    // Every y in {0,1}^4, every public pair: the library decision equals the
    // locally enumerated posterior argmax.
    for (int yflat = 0; yflat < 16; ++yflat) {
        std::vector<std::uint8_t> y(n);
        for (int t = 0; t < n; ++t) y[t] = static_cast<std::uint8_t>((yflat >> t) & 1);
        for (long w1 = 0; w1 < 2; ++w1) {
            for (long w2 = 0; w2 < 2; ++w2) {
                double best = -1.0;
                long bk1 = 0, bk2 = 0;
                for (long k1 = 0; k1 < 2; ++k1)
                    for (long k2 = 0; k2 < 2; ++k2) {
                        double post = 0.0;
                        for (long j1 = 0; j1 < 2; ++j1)
                            for (long j2 = 0; j2 < 2; ++j2) {
                                double lik = 1.0;
                                for (int t = 0; t < n; ++t)
                                    lik *= mac.w_y(cb.level(0, w1, k1, j1, t),
                                                   cb.level(1, w2, k2, j2, t), y[t]);
                                post += lik;
                            }
                        if (post > best) {
                            best = post;
                            bk1 = k1;
                            bk2 = k2;
                        }
                    }
                auto [dk1, dk2] = decode_keys(cb, mac, y, w1, w2);
                CHECK(dk1 == bk1);
                CHECK(dk2 == bk2);
            }
        }
    }
}

TEST_CASE("exact metrics on single-codeword tables") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    std::array<UserSizes, 2> ones{{{1, 1, 1}, {1, 1, 1}}};
    CodebookPair cb(ones, 4, cfg, 11);
    SimReport rep = exact_metrics(cb, mac, cfg);
    CHECK(rep.p_err_halfwidth == 0.0);  // exact mode carries no interval
    // TV(point mass, Q^n) = 1 - Q^n(codeword), in closed form.
    double expected1 = 1.0 - q_n(cb.word(0, 0, 0, 0), 4, 0.28 * 0.25);
    double expected2 = 1.0 - q_n(cb.word(1, 0, 0, 0), 4, 0.72 * 0.25);
    CHECK(rep.source_tv_1 == doctest::Approx(expected1).epsilon(1e-12));
    CHECK(rep.source_tv_2 == doctest::Approx(expected2).epsilon(1e-12));
    // One key value per user: never an error in the auxiliary problem.
    CHECK(rep.p_err == 0.0);
}

TEST_CASE("exact metrics budget gate") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    CodebookPair cb = tiny_codebooks(1);
    CHECK_THROWS_AS(exact_metrics(cb, mac, cfg, Decoder::KeyPosterior, 100.0),
                    BudgetExceeded);
}

TEST_CASE("secrecy TV is invariant under key relabeling") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    CodebookPair cb = tiny_codebooks(21);

    // Swap the two key rows of user 1 for every (w, j).
    std::array<std::vector<std::uint64_t>, 2> words;
    for (int u = 0; u < 2; ++u) {
        words[u].resize(cb.entries(u));
        for (long w = 0; w < 2; ++w)
            for (long k = 0; k < 2; ++k)
                for (long j = 0; j < 2; ++j) {
                    long kk = (u == 0) ? 1 - k : k;
                    words[u][cb.index_of(u, w, k, j)] = cb.word(u, w, kk, j);
                }
    }
    CodebookPair relabeled = CodebookPair::from_words(kTinySizes, 4, words, cb.seed());
    SimReport a = exact_metrics(cb, mac, cfg);
    SimReport b = exact_metrics(relabeled, mac, cfg);
    CHECK(a.secrecy_tv == doctest::Approx(b.secrecy_tv).epsilon(1e-12));
    CHECK(a.source_tv_1 == doctest::Approx(b.source_tv_1).epsilon(1e-12));
}

TEST_CASE("monte carlo agrees with the exact protocol error") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    CodebookPair cb = tiny_codebooks(1);
    SimReport exact = exact_metrics(cb, mac, cfg);
    SimReport mc = protocol_metrics(cb, mac, cfg, 20000, 77);
    double hw3 = wilson_halfwidth(mc.p_err, mc.trials, 3.0);
    CHECK(std::fabs(mc.p_err - exact.p_err_protocol) <= hw3);
    // Exact quantities agree between the two paths.
    CHECK(mc.source_tv_1 == doctest::Approx(exact.source_tv_1).epsilon(1e-12));
    CHECK(mc.covertness_kl == doctest::Approx(exact.covertness_kl).epsilon(1e-12));
}

TEST_CASE("monte carlo reports are deterministic in the seed") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    CodebookPair cb = tiny_codebooks(2);
    SimReport a = protocol_metrics(cb, mac, cfg, 5000, 123);
    SimReport b = protocol_metrics(cb, mac, cfg, 5000, 123);
    CHECK(a.p_err == b.p_err);
    CHECK(a.empty_preimage_events == b.empty_preimage_events);
    CHECK(a.secrecy_tv == b.secrecy_tv);
}

TEST_CASE("singleton preimages are recovered deterministically") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    CodebookPair cb = tiny_codebooks(4);
    CounterRng rng(31);
    int singles = 0;
    for (std::uint64_t trial = 0; trial < 5000 && singles < 20; ++trial) {
        TrialRecord rec = protocol_run(cb, mac, cfg, rng, trial);
        const std::uint64_t x[2] = {rec.x1, rec.x2};
        const bool empty[2] = {rec.empty_preimage_1, rec.empty_preimage_2};
        const long got[2][3] = {{rec.w1, rec.k1, rec.j1}, {rec.w2, rec.k2, rec.j2}};
        for (int u = 0; u < 2; ++u) {
            if (empty[u]) continue;
            auto pre = cb.preimage(u, x[u]);
            if (pre.size() == 1) {
                ++singles;
                long w, k, j;
                cb.unpack_index(u, pre[0], w, k, j);
                CHECK(got[u][0] == w);
                CHECK(got[u][1] == k);
                CHECK(got[u][2] == j);
            }
        }
    }
    CHECK(singles > 0);
}

TEST_CASE("all-innocent tables never hit an empty preimage at alpha zero") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg(0.5, 0.5, 0.0);
    CodebookPair cb(kTinySizes, 5, cfg, 9);
    CounterRng rng(17);
    std::map<long, long> counts;
    for (std::uint64_t trial = 0; trial < 4000; ++trial) {
        TrialRecord rec = protocol_run(cb, mac, cfg, rng, trial);
        CHECK_FALSE(rec.empty_preimage_1);
        CHECK_FALSE(rec.empty_preimage_2);
        ++counts[(rec.w1 * 2 + rec.k1) * 2 + rec.j1];
    }
    // Posterior is uniform over the eight identical entries.
    CHECK(counts.size() == 8);
    for (const auto& [key, cnt] : counts)
        CHECK(std::fabs(cnt / 4000.0 - 1.0 / 8) < 0.03);
}

TEST_CASE("protocol secrecy triangle inequality on exact instances") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    for (std::uint64_t seed : {1, 5, 9}) {
        CodebookPair cb = tiny_codebooks(seed);
        SimReport aux = exact_metrics(cb, mac, cfg);
        double proto_tv = exact_protocol_secrecy_tv(cb, mac, cfg);
        CHECK(proto_tv <= aux.secrecy_tv + aux.source_tv_1 + aux.source_tv_2 + 1e-12);
    }
}

TEST_CASE("source simulation identity on a small instance") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg(0.28, 0.72, 0.3);
    const int n = 3;
    std::array<UserSizes, 2> sizes{{{2, 2, 1}, {1, 2, 2}}};
    CodebookPair cb(sizes, n, cfg, 13);

    const double w1 = 0.28 * 0.3, w2 = 0.72 * 0.3;
    const std::uint64_t top = 1ULL << n;
    const long e1 = cb.entries(0), e2 = cb.entries(1);

    auto word_at = [&](int u, long idx) {
        long w, k, j;
        cb.unpack_index(u, idx, w, k, j);
        return cb.word(u, w, k, j);
    };
    auto ptilde = [&](int u, std::uint64_t x) {
        double count = 0.0;
        long total = u == 0 ? e1 : e2;
        for (long idx = 0; idx < total; ++idx)
            if (word_at(u, idx) == x) count += 1.0;
        return count / total;
    };

    // Right side: TV of the product marginals over (x1, x2).
    double rhs = 0.0;
    for (std::uint64_t x1 = 0; x1 < top; ++x1)
        for (std::uint64_t x2 = 0; x2 < top; ++x2)
            rhs += 0.5 * std::fabs(q_n(x1, n, w1) * q_n(x2, n, w2) -
                                   ptilde(0, x1) * ptilde(1, x2));

    // Left side: full-joint TV over (x1, x2, index1, index2, y, z). Both
    // laws share the likelihood-encoder kernel and the channels, so this
    // must collapse to the marginal TV exactly.
    double lhs = 0.0;
    for (std::uint64_t x1 = 0; x1 < top; ++x1) {
        auto pre1 = cb.preimage(0, x1);
        for (std::uint64_t x2 = 0; x2 < top; ++x2) {
            auto pre2 = cb.preimage(1, x2);
            for (long t1 = 0; t1 < e1; ++t1) {
                double k1w = pre1.empty()
                                 ? (t1 == 0 ? 1.0 : 0.0)
                                 : (std::find(pre1.begin(), pre1.end(), t1) != pre1.end()
                                        ? 1.0 / pre1.size()
                                        : 0.0);
                if (k1w == 0.0) continue;
                for (long t2 = 0; t2 < e2; ++t2) {
                    double k2w = pre2.empty()
                                     ? (t2 == 0 ? 1.0 : 0.0)
                                     : (std::find(pre2.begin(), pre2.end(), t2) != pre2.end()
                                            ? 1.0 / pre2.size()
                                            : 0.0);
                    if (k2w == 0.0) continue;

                    double p_hat = q_n(x1, n, w1) * q_n(x2, n, w2) * k1w * k2w;
                    double p_til = (word_at(0, t1) == x1 && word_at(1, t2) == x2)
                                       ? 1.0 / (static_cast<double>(e1) * e2)
                                       : 0.0;
                    double base_gap = std::fabs(p_hat - p_til);
                    if (base_gap == 0.0) continue;
                    for (std::uint64_t yf = 0; yf < top; ++yf) {
                        double wy = 1.0;
                        for (int t = 0; t < n; ++t)
                            wy *= mac.w_y(static_cast<int>((x1 >> t) & 1),
                                          static_cast<int>((x2 >> t) & 1),
                                          static_cast<std::size_t>((yf >> t) & 1));
                        for (std::uint64_t zf = 0; zf < top; ++zf) {
                            double wz = 1.0;
                            for (int t = 0; t < n; ++t)
                                wz *= mac.w_z(static_cast<int>((x1 >> t) & 1),
                                              static_cast<int>((x2 >> t) & 1),
                                              static_cast<std::size_t>((zf >> t) & 1));
                            lhs += 0.5 * base_gap * wy * wz;
                        }
                    }
                }
            }
        }
    }
    CHECK(lhs == doctest::Approx(rhs).epsilon(1e-10));
}

TEST_CASE("key marginals under the auxiliary law are uniform") {
    CodebookPair cb = tiny_codebooks(6);
    std::map<long, long> counts;
    for (long idx = 0; idx < cb.entries(0); ++idx) {
        long w, k, j;
        cb.unpack_index(0, idx, w, k, j);
        ++counts[k];
    }
    CHECK(counts[0] == counts[1]);
}

TEST_CASE("lemma 3 bounds on a degenerate channel are vacuous but finite") {
    // W_Y carries no information: every input pair yields Bern(0.5).
    std::array<std::array<std::vector<double>, 2>, 2> wy, wz;
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b) {
            wy[a][b] = {0.5, 0.5};
            wz[a][b] = {0.7 - 0.1 * a - 0.05 * b, 0.3 + 0.1 * a + 0.05 * b};
        }
    BinaryMacPair mac({"0", "1"}, {"0", "1"}, wy, wz, {"0", "0"}, {"1", "1"});
    CovertConfig cfg(0.5, 0.5, 0.2);
    RatePlan plan = plan_from_sizes(mac, cfg, 6, {0.1, 0.1, 0.1}, kTinySizes);
    Lemma3Breakdown rel = lemma3_reliability(plan, mac, cfg);
    // gamma_T = 0 makes each exponential term M_T N_T >= 1.
    CHECK(rel.total >= 24.0 - 1e-9);
    CHECK(std::isfinite(rel.total));
    for (const auto& t : rel.terms) {
        CHECK(t.prob_term >= 0.0);
        CHECK(t.prob_term <= 1.0);
    }
}

TEST_CASE("lemma 3 bounds on table 1") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    RatePlan plan = plan_from_sizes(mac, cfg, 10, {0.2, 0.2, 0.2}, kTinySizes);
    Lemma3Breakdown rel = lemma3_reliability(plan, mac, cfg);
    Lemma3Breakdown res = lemma3_resolvability(plan, mac, cfg);
    CHECK(rel.total >= 0.0);
    CHECK(res.total >= 0.0);
    CHECK(std::isfinite(rel.total));
    CHECK(std::isfinite(res.total));
    for (const auto& t : res.terms) {
        CHECK(t.prob_term >= 0.0);
        CHECK(t.prob_term <= 1.0);
    }
    // Resolvability prefactor matches the closed form.
    const DiscreteDist q0 = mac.q(0);
    double v_min = std::min(q0[0], q0[1]);
    double expected =
        10 * std::log2(4.0 / ((1.0 - 0.28 * 0.25) * (1.0 - 0.72 * 0.25) * v_min));
    CHECK(res.prefactor == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("concentration bounds") {
    // Bernstein decreases to zero in t.
    double prev = 1.0;
    for (double t : {0.5, 1.0, 2.0, 4.0, 8.0, 16.0}) {
        double b = bernstein_bound(1.0, 2.0, t);
        CHECK(b < prev);
        prev = b;
    }
    CHECK(prev < 1e-4);
    CHECK_THROWS_AS(bernstein_bound(0.0, 1.0, 1.0), DomainError);
    CHECK_THROWS_AS(bernstein_bound(1.0, 1.0, 0.0), DomainError);

    // Hoeffding with one [0,1] variable at v = 1: e^{-2}.
    CHECK(hoeffding_bound({{0.0, 1.0}}, 1.0) ==
          doctest::Approx(0.1353352832366127).epsilon(1e-12));
    CHECK_THROWS_AS(hoeffding_bound({}, 1.0), DomainError);
    CHECK_THROWS_AS(hoeffding_bound({{0.0, 1.0}}, 0.0), DomainError);

    // One-shot bound vanishes when gamma clears the support and M is huge.
    DiscreteDist src = DiscreteDist::bernoulli(0.25);
    double max_sum = 10 * std::log2(4.0);  // worst-case surprisal at p = 0.25
    CHECK(oneshot_resolvability_bound(max_sum + 1.0, 1e300, src, 10) ==
          doctest::Approx(0.0).epsilon(1e-9));
    CHECK_THROWS_AS(oneshot_resolvability_bound(0.0, 10.0, src, 5), DomainError);
}

TEST_CASE("decay study smoke") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    DecayOptions opts;
    opts.codebooks = 3;
    DecayStudy study = decay_study(
        mac, [](int n) { return alpha_schedule(n); }, {6, 8}, {0.1, 0.1, 0.1}, 0.28, 3000,
        5, opts);
    REQUIRE(study.rows.size() == 2);
    for (const auto& row : study.rows) {
        CHECK(row.p_err >= 0.0);
        CHECK(row.p_err <= 1.0);
        CHECK(row.source_tv == doctest::Approx(row.source_tv_1 + row.source_tv_2));
        // Covertness column is n D(Q_Z || Q_0) by construction.
        CovertConfig cfg(0.28, 0.72, row.alpha);
        auto [qy, qz] = output_dists(mac, cfg);
        (void)qy;
        CHECK(row.covertness_kl ==
              doctest::Approx(row.n * kl_divergence(qz, mac.q(0))).epsilon(1e-12));
    }
    CHECK(study.fit_p_err.valid);
}

TEST_CASE("decay study with alpha pinned at zero is trivial") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    DecayOptions opts;
    opts.codebooks = 2;
    opts.m = 1;
    opts.n_rand = 1;
    DecayStudy study = decay_study(
        mac, [](int) { return 0.0; }, {4, 6}, {0.1, 0.1, 0.1}, 0.5, 500, 3, opts);
    for (const auto& row : study.rows) {
        CHECK(row.p_err == 0.0);
        CHECK(row.source_tv == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(row.covertness_kl == doctest::Approx(0.0).epsilon(1e-14));
    }
}

TEST_CASE("wilson halfwidth sanity") {
    CHECK(wilson_halfwidth(0.5, 100, 1.96) > wilson_halfwidth(0.5, 10000, 1.96));
    CHECK(wilson_halfwidth(0.0, 100, 3.0) > 0.0);
    CHECK_THROWS_AS(wilson_halfwidth(0.5, 0, 2.0), DomainError);
}

TEST_CASE("serialization smoke") {
    BinaryMacPair mac = BinaryMacPair::table1_channel(1);
    CovertConfig cfg = tiny_cfg();
    CodebookPair cb = tiny_codebooks(1);
    SimReport rep = exact_metrics(cb, mac, cfg);
    std::string js = sim_report_to_json(rep);
    CHECK(js.find("\"p_err\"") != std::string::npos);
    CHECK(js.find("\"covertness_kl\"") != std::string::npos);

    RatePlan plan = plan_from_sizes(mac, cfg, 4, {0.1, 0.1, 0.1}, kTinySizes);
    std::string pj = rate_plan_to_json(plan, 1);
    CHECK(pj.find("\"violations\"") != std::string::npos);
}

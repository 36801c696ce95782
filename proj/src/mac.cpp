#include "covertkey/mac.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "covertkey/errors.hpp"

namespace covertkey {

CovertConfig::CovertConfig(double r1, double r2, double a) : rho1(r1), rho2(r2), alpha(a) {
    if (!(rho1 > 0.0 && rho1 < 1.0 && rho2 > 0.0 && rho2 < 1.0))
        throw DomainError("CovertConfig: rho components must lie in (0, 1)");
    if (std::fabs(rho1 + rho2 - 1.0) > tol::kNormalization)
        throw DomainError("CovertConfig: rho1 + rho2 must be 1");
    if (!(alpha >= 0.0 && alpha < 1.0))
        throw DomainError("CovertConfig: alpha must lie in [0, 1)");
    if (rho1 * alpha >= 1.0 || rho2 * alpha >= 1.0)
        throw DomainError("CovertConfig: rho_i * alpha must be below 1");
}

BinaryMacPair::BinaryMacPair(std::vector<Symbol> y_alphabet, std::vector<Symbol> z_alphabet,
                             std::array<std::array<std::vector<double>, 2>, 2> w_y,
                             std::array<std::array<std::vector<double>, 2>, 2> w_z,
                             std::array<Symbol, 2> innocent, std::array<Symbol, 2> meaningful)
    : y_alphabet_(std::move(y_alphabet)),
      z_alphabet_(std::move(z_alphabet)),
      w_y_(std::move(w_y)),
      w_z_(std::move(w_z)) {
    for (int u = 0; u < 2; ++u) {
        x_sym_[u][0] = innocent[u];
        x_sym_[u][1] = meaningful[u];
        if (x_sym_[u][0] == x_sym_[u][1])
            throw DomainError("BinaryMacPair: innocent and meaningful symbols coincide");
    }
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            // Row constructors enforce the probability-vector invariants.
            DiscreteDist(y_alphabet_, w_y_[a][b]);
            DiscreteDist(z_alphabet_, w_z_[a][b]);
        }
    }
}

const std::vector<double>& BinaryMacPair::row(
    const std::array<std::array<std::vector<double>, 2>, 2>& table, int i) {
    switch (i) {
        case 0: return table[0][0];
        case 1: return table[1][0];
        case 2: return table[0][1];
        case 3: return table[1][1];
        default: throw DomainError("BinaryMacPair: row index must be 0..3");
    }
}

DiscreteDist BinaryMacPair::p(int i) const { return DiscreteDist(y_alphabet_, row(w_y_, i)); }
DiscreteDist BinaryMacPair::q(int i) const { return DiscreteDist(z_alphabet_, row(w_z_, i)); }

namespace {

std::vector<Symbol> read_alphabet(const nlohmann::json& j, const char* key) {
    std::vector<Symbol> out;
    for (const auto& v : j.at(key)) {
        if (v.is_string())
            out.push_back(v.get<std::string>());
        else
            out.push_back(v.dump());
    }
    return out;
}

Symbol read_symbol(const nlohmann::json& v) {
    return v.is_string() ? v.get<std::string>() : v.dump();
}

std::array<std::array<std::vector<double>, 2>, 2> read_table(
    const nlohmann::json& j, const char* key, const std::array<Symbol, 2>& innocent,
    const std::array<Symbol, 2>& meaningful, std::size_t width) {
    std::array<std::array<std::vector<double>, 2>, 2> table;
    const auto& t = j.at(key);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            std::string row_key = (a ? meaningful[0] : innocent[0]) + "," +
                                  (b ? meaningful[1] : innocent[1]);
            if (!t.contains(row_key)) {
                std::ostringstream os;
                os << key << ": missing row '" << row_key << "'";
                throw DomainError(os.str());
            }
            std::vector<double> row = t.at(row_key).get<std::vector<double>>();
            if (row.size() != width) {
                std::ostringstream os;
                os << key << " row '" << row_key << "': expected " << width << " entries";
                throw DomainError(os.str());
            }
            table[a][b] = std::move(row);
        }
    }
    return table;
}

}  // namespace

BinaryMacPair BinaryMacPair::load_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw DomainError("BinaryMacPair: cannot open '" + path + "'");
    nlohmann::json j;
    in >> j;

    std::vector<Symbol> ya = read_alphabet(j, "y_alphabet");
    std::vector<Symbol> za = read_alphabet(j, "z_alphabet");
    std::array<Symbol, 2> innocent{read_symbol(j.at("innocent").at(0)),
                                   read_symbol(j.at("innocent").at(1))};
    std::array<Symbol, 2> meaningful{read_symbol(j.at("meaningful").at(0)),
                                     read_symbol(j.at("meaningful").at(1))};
    auto wy = read_table(j, "w_y", innocent, meaningful, ya.size());
    auto wz = read_table(j, "w_z", innocent, meaningful, za.size());
    return BinaryMacPair(std::move(ya), std::move(za), std::move(wy), std::move(wz),
                         innocent, meaningful);
}

std::string BinaryMacPair::to_json_string() const {
    nlohmann::json j;
    j["y_alphabet"] = y_alphabet_;
    j["z_alphabet"] = z_alphabet_;
    j["innocent"] = {x_sym_[0][0], x_sym_[1][0]};
    j["meaningful"] = {x_sym_[0][1], x_sym_[1][1]};
    nlohmann::json wy, wz;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            std::string key = x_sym_[0][a] + "," + x_sym_[1][b];
            wy[key] = w_y_[a][b];
            wz[key] = w_z_[a][b];
        }
    }
    j["w_y"] = wy;
    j["w_z"] = wz;
    return j.dump(2) + "\n";
}

void BinaryMacPair::save_file(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("BinaryMacPair: cannot write '" + path + "'");
    out << to_json_string();
}

BinaryMacPair BinaryMacPair::table1_channel(int which) {
    if (which != 1 && which != 2) throw DomainError("table1_channel: which must be 1 or 2");
    // Rows (x1,x2) = (0,0), (1,0), (0,1), (1,1) as [W(0|..), W(1|..)].
    auto table = [](std::array<std::array<double, 2>, 4> rows) {
        std::array<std::array<std::vector<double>, 2>, 2> t;
        t[0][0] = {rows[0][0], rows[0][1]};
        t[1][0] = {rows[1][0], rows[1][1]};
        t[0][1] = {rows[2][0], rows[2][1]};
        t[1][1] = {rows[3][0], rows[3][1]};
        return t;
    };
    auto wy = which == 1
                  ? table({{{0.33, 0.67}, {0.9, 0.1}, {0.73, 0.27}, {0.44, 0.56}}})
                  : table({{{0.9, 0.1}, {0.7, 0.3}, {0.8, 0.2}, {0.1, 0.9}}});
    auto wz = which == 1
                  ? table({{{0.67, 0.33}, {0.38, 0.62}, {0.52, 0.48}, {0.85, 0.15}}})
                  : table({{{0.7, 0.3}, {0.6, 0.4}, {0.6, 0.4}, {0.2, 0.8}}});
    return BinaryMacPair({"0", "1"}, {"0", "1"}, std::move(wy), std::move(wz), {"0", "0"},
                         {"1", "1"});
}

std::string ValidationReport::to_string() const {
    if (issues.empty()) return "all checks passed";
    std::ostringstream os;
    for (const auto& i : issues) os << "[" << i.check << "] " << i.detail << "\n";
    return os.str();
}

ValidationReport validate(const BinaryMacPair& mac, double tol) {
    ValidationReport report;

    auto check_ac = [&](const DiscreteDist& num, const DiscreteDist& den, const std::string& name) {
        for (std::size_t s = 0; s < num.size(); ++s) {
            if (num[s] > 0.0 && den[s] == 0.0) {
                std::ostringstream os;
                os << name << " puts mass " << num[s] << " on symbol '" << num.support()[s]
                   << "' where the innocent row is 0";
                report.issues.push_back({"absolute-continuity", os.str()});
                return;
            }
        }
    };
    for (int i = 1; i <= 3; ++i) {
        check_ac(mac.p(i), mac.p(0), "P_" + std::to_string(i));
        check_ac(mac.q(i), mac.q(0), "Q_" + std::to_string(i));
    }

    // Degeneracy: some rho in [0,1] with rho*(Q1-Q0) + (1-rho)*(Q2-Q0) = 0,
    // i.e. Q_0 equals the corresponding mixture of Q_1 and Q_2 and chi(rho)=0.
    const DiscreteDist q0 = mac.q(0), q1 = mac.q(1), q2 = mac.q(2);
    std::vector<double> d1(q0.size()), d2(q0.size());
    double n1 = 0.0, n2 = 0.0;
    for (std::size_t z = 0; z < q0.size(); ++z) {
        d1[z] = q1[z] - q0[z];
        d2[z] = q2[z] - q0[z];
        n1 = std::max(n1, std::fabs(d1[z]));
        n2 = std::max(n2, std::fabs(d2[z]));
    }
    auto degenerate_at = [&](double rho, const std::string& why) {
        std::ostringstream os;
        os << "Q_0 matches the rho = (" << rho << ", " << 1.0 - rho
           << ") mixture of Q_1, Q_2 (" << why << "); chi vanishes there";
        report.issues.push_back({"non-degeneracy", os.str()});
    };
    if (n1 <= tol) {
        degenerate_at(1.0, "Q_1 = Q_0");
    } else if (n2 <= tol) {
        degenerate_at(0.0, "Q_2 = Q_0");
    } else {
        // Solve rho*(d1 - d2) = -d2 coordinate-wise on the best-conditioned
        // coordinate, then verify consistency across all of them.
        std::size_t pivot = 0;
        double best = 0.0;
        for (std::size_t z = 0; z < d1.size(); ++z) {
            double g = std::fabs(d1[z] - d2[z]);
            if (g > best) {
                best = g;
                pivot = z;
            }
        }
        if (best > tol) {
            double rho = -d2[pivot] / (d1[pivot] - d2[pivot]);
            if (rho >= -tol && rho <= 1.0 + tol) {
                double worst = 0.0;
                for (std::size_t z = 0; z < d1.size(); ++z)
                    worst = std::max(worst, std::fabs(rho * d1[z] + (1.0 - rho) * d2[z]));
                if (worst <= tol) degenerate_at(rho, "interior root of zeta");
            }
        }
        // best <= tol means d1 = d2 != 0: zeta is constant and nonzero, fine.
    }
    return report;
}

std::pair<DiscreteDist, DiscreteDist> input_dists(const BinaryMacPair& mac,
                                                  const CovertConfig& cfg) {
    auto make = [&](int user, double rho) {
        return DiscreteDist({mac.input_symbol(user, 0), mac.input_symbol(user, 1)},
                            {1.0 - rho * cfg.alpha, rho * cfg.alpha});
    };
    return {make(0, cfg.rho1), make(1, cfg.rho2)};
}

namespace {

std::array<double, 2> input_weights(const CovertConfig& cfg, int user) {
    double w1 = (user == 0 ? cfg.rho1 : cfg.rho2) * cfg.alpha;
    return {1.0 - w1, w1};
}

}  // namespace

std::pair<DiscreteDist, DiscreteDist> output_dists(const BinaryMacPair& mac,
                                                   const CovertConfig& cfg) {
    auto wx1 = input_weights(cfg, 0);
    auto wx2 = input_weights(cfg, 1);
    std::vector<double> qy(mac.y_size(), 0.0), qz(mac.z_size(), 0.0);
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            double w = wx1[a] * wx2[b];
            for (std::size_t y = 0; y < mac.y_size(); ++y) qy[y] += w * mac.w_y(a, b, y);
            for (std::size_t z = 0; z < mac.z_size(); ++z) qz[z] += w * mac.w_z(a, b, z);
        }
    }
    return {DiscreteDist(mac.y_alphabet(), qy), DiscreteDist(mac.z_alphabet(), qz)};
}

JointDist covert_joint(const BinaryMacPair& mac, const CovertConfig& cfg) {
    auto wx1 = input_weights(cfg, 0);
    auto wx2 = input_weights(cfg, 1);
    std::vector<std::vector<Symbol>> axes{
        {mac.input_symbol(0, 0), mac.input_symbol(0, 1)},
        {mac.input_symbol(1, 0), mac.input_symbol(1, 1)},
        mac.y_alphabet(),
        mac.z_alphabet()};
    std::vector<double> probs;
    probs.reserve(4 * mac.y_size() * mac.z_size());
    for (int a = 0; a < 2; ++a)
        for (int b = 0; b < 2; ++b)
            for (std::size_t y = 0; y < mac.y_size(); ++y)
                for (std::size_t z = 0; z < mac.z_size(); ++z)
                    probs.push_back(wx1[a] * wx2[b] * mac.w_y(a, b, y) * mac.w_z(a, b, z));
    return JointDist(std::move(axes), std::move(probs));
}

std::vector<double> zeta_all(const BinaryMacPair& mac, double rho1) {
    if (!(rho1 >= 0.0 && rho1 <= 1.0)) throw DomainError("zeta: rho1 outside [0, 1]");
    const DiscreteDist q0 = mac.q(0), q1 = mac.q(1), q2 = mac.q(2);
    std::vector<double> out(q0.size());
    for (std::size_t z = 0; z < q0.size(); ++z)
        out[z] = rho1 * (q1[z] - q0[z]) + (1.0 - rho1) * (q2[z] - q0[z]);
    return out;
}

double zeta(const BinaryMacPair& mac, double rho1, std::size_t z) {
    auto v = zeta_all(mac, rho1);
    if (z >= v.size()) throw DomainError("zeta: z index out of range");
    return v[z];
}

double chi(const BinaryMacPair& mac, double rho1) {
    const DiscreteDist q0 = mac.q(0);
    auto v = zeta_all(mac, rho1);
    double s = 0.0;
    for (std::size_t z = 0; z < v.size(); ++z) {
        if (v[z] == 0.0) continue;
        if (q0[z] == 0.0)
            throw AbsoluteContinuityViolation("chi: Q_0 vanishes where zeta does not");
        s += v[z] * v[z] / q0[z];
    }
    return s;
}

double kappa(const BinaryMacPair& mac, double rho1) {
    double c = chi(mac, rho1);
    if (c <= 0.0) throw DegenerateChannel("kappa: chi(rho) = 0, kappa undefined");
    return std::sqrt(2.0 / c);
}

double zeta_n(const BinaryMacPair& mac, const CovertConfig& cfg, std::size_t z) {
    if (cfg.alpha == 0.0) throw DomainError("zeta_n: alpha must be positive");
    auto [qy, qz] = output_dists(mac, cfg);
    (void)qy;
    const DiscreteDist q0 = mac.q(0);
    if (z >= q0.size()) throw DomainError("zeta_n: z index out of range");
    return (qz[z] - q0[z]) / cfg.alpha;
}

double chi_n(const BinaryMacPair& mac, const CovertConfig& cfg) {
    if (cfg.alpha == 0.0) throw DomainError("chi_n: alpha must be positive");
    auto [qy, qz] = output_dists(mac, cfg);
    (void)qy;
    const DiscreteDist q0 = mac.q(0);
    double s = 0.0;
    for (std::size_t z = 0; z < q0.size(); ++z) {
        double d = (qz[z] - q0[z]) / cfg.alpha;
        if (d == 0.0) continue;
        if (q0[z] == 0.0)
            throw AbsoluteContinuityViolation("chi_n: Q_0 vanishes where zeta_n does not");
        s += d * d / q0[z];
    }
    return s;
}

double alpha_schedule(int n) {
    if (n < 2) throw DomainError("alpha_schedule: n must be >= 2");
    return 1.0 / (std::log2(static_cast<double>(n)) * std::sqrt(static_cast<double>(n)));
}

namespace {

std::array<std::array<std::vector<double>, 2>, 2> marginal_channel(
    const BinaryMacPair& mac, const CovertConfig& cfg, int keep_mask, bool for_y) {
    std::size_t width = for_y ? mac.y_size() : mac.z_size();
    auto wx1 = input_weights(cfg, 0);
    auto wx2 = input_weights(cfg, 1);
    std::array<std::array<std::vector<double>, 2>, 2> out;
    for (int a = 0; a < 2; ++a) {
        for (int b = 0; b < 2; ++b) {
            std::vector<double> row(width, 0.0);
            // Average over the users absent from keep_mask.
            for (int aa = 0; aa < 2; ++aa) {
                if ((keep_mask & 1) && aa != a) continue;
                for (int bb = 0; bb < 2; ++bb) {
                    if ((keep_mask & 2) && bb != b) continue;
                    double w = ((keep_mask & 1) ? 1.0 : wx1[aa]) *
                               ((keep_mask & 2) ? 1.0 : wx2[bb]);
                    for (std::size_t s = 0; s < width; ++s)
                        row[s] += w * (for_y ? mac.w_y(aa, bb, s) : mac.w_z(aa, bb, s));
                }
            }
            out[a][b] = std::move(row);
        }
    }
    return out;
}

}  // namespace

std::array<std::array<std::vector<double>, 2>, 2> marginal_channel_y(
    const BinaryMacPair& mac, const CovertConfig& cfg, int keep_mask) {
    return marginal_channel(mac, cfg, keep_mask, true);
}

std::array<std::array<std::vector<double>, 2>, 2> marginal_channel_z(
    const BinaryMacPair& mac, const CovertConfig& cfg, int keep_mask) {
    return marginal_channel(mac, cfg, keep_mask, false);
}

ExpansionReport expansion_report(const BinaryMacPair& mac, const CovertConfig& cfg) {
    ExpansionReport report;
    report.alpha = cfg.alpha;

    JointDist joint = covert_joint(mac, cfg);
    auto [qy, qz] = output_dists(mac, cfg);
    (void)qy;
    const DiscreteDist q0z = mac.q(0);

    report.divergence.exact = kl_divergence(qz, q0z);
    if (cfg.alpha > 0.0) {
        report.chi_n_value = chi_n(mac, cfg);
        report.divergence.prediction =
            cfg.alpha * cfg.alpha * report.chi_n_value / (2.0 * M_LN2);
    }
    report.divergence.residual = report.divergence.exact - report.divergence.prediction;

    const double dp[2] = {kl_divergence(mac.p(1), mac.p(0)),
                          kl_divergence(mac.p(2), mac.p(0))};
    const double dq[2] = {kl_divergence(mac.q(1), mac.q(0)),
                          kl_divergence(mac.q(2), mac.q(0))};
    const double rho[2] = {cfg.rho1, cfg.rho2};

    auto wx1 = input_weights(cfg, 0);
    auto wx2 = input_weights(cfg, 1);

    const int masks[3] = {1, 2, 3};
    for (int mi = 0; mi < 3; ++mi) {
        int mask = masks[mi];
        SubsetExpansion& sub = report.subsets[mi];
        sub.subset_mask = mask;
        sub.label = mask == 1 ? "1" : mask == 2 ? "2" : "1,2";

        std::vector<std::size_t> t_axes, tc_axes;
        if (mask & 1) t_axes.push_back(0); else tc_axes.push_back(0);
        if (mask & 2) t_axes.push_back(1); else tc_axes.push_back(1);

        sub.mi_y.exact = mutual_information(joint, t_axes, {2}, tc_axes);
        sub.mi_z.exact = mutual_information(joint, t_axes, {3}, {});
        sub.mi_yz.exact = mutual_information(joint, t_axes, {2, 3}, tc_axes);

        double pred_y = 0.0, pred_z = 0.0;
        for (int u = 0; u < 2; ++u) {
            if (!(mask & (1 << u))) continue;
            pred_y += rho[u] * cfg.alpha * dp[u];
            pred_z += rho[u] * cfg.alpha * dq[u];
        }
        sub.mi_y.prediction = pred_y;
        sub.mi_z.prediction = pred_z;
        sub.mi_yz.prediction = pred_y + pred_z;
        sub.mi_y.residual = sub.mi_y.exact - sub.mi_y.prediction;
        sub.mi_z.residual = sub.mi_z.exact - sub.mi_z.prediction;
        sub.mi_yz.residual = sub.mi_yz.exact - sub.mi_yz.prediction;

        // Per-symbol log-ratio moments and Lemma-style deviation constants.
        auto cond_y = marginal_channel_y(mac, cfg, 3 ^ mask);
        double mean = 0.0, mean_sq = 0.0, dev = 0.0;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                double w_in = wx1[a] * wx2[b];
                if (w_in == 0.0) continue;
                for (std::size_t y = 0; y < mac.y_size(); ++y) {
                    double pr = w_in * mac.w_y(a, b, y);
                    if (pr == 0.0) continue;
                    double lr = std::log2(mac.w_y(a, b, y) / cond_y[a][b][y]);
                    mean += pr * lr;
                    mean_sq += pr * lr * lr;
                    dev = std::max(dev, std::fabs(lr - sub.mi_y.exact));
                }
            }
        }
        sub.var_y = mean_sq - mean * mean;
        sub.dev_y = dev;

        auto chan_z = marginal_channel_z(mac, cfg, mask);
        mean = mean_sq = dev = 0.0;
        for (int a = 0; a < 2; ++a) {
            for (int b = 0; b < 2; ++b) {
                // Only the kept users' levels matter; weight the rest out.
                if (!(mask & 1) && a == 1) continue;
                if (!(mask & 2) && b == 1) continue;
                double w_in = ((mask & 1) ? wx1[a] : 1.0) * ((mask & 2) ? wx2[b] : 1.0);
                if (w_in == 0.0) continue;
                for (std::size_t z = 0; z < mac.z_size(); ++z) {
                    double pr = w_in * chan_z[a][b][z];
                    if (pr == 0.0) continue;
                    double lr = std::log2(chan_z[a][b][z] / qz[z]);
                    mean += pr * lr;
                    mean_sq += pr * lr * lr;
                    dev = std::max(dev, std::fabs(lr - sub.mi_z.exact));
                }
            }
        }
        sub.var_z = mean_sq - mean * mean;
        sub.dev_z = dev;
    }
    return report;
}

}  // namespace covertkey

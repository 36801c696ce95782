#include "covertkey/dist.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <sstream>

#include "covertkey/errors.hpp"

namespace covertkey {

namespace {

void check_probability_vector(const std::vector<double>& probs, double norm_tol,
                              const char* what) {
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0) || p > 1.0 + norm_tol) {
            std::ostringstream os;
            os << what << ": entry " << p << " outside [0, 1]";
            throw DomainError(os.str());
        }
        sum += p;
    }
    if (std::fabs(sum - 1.0) > norm_tol) {
        std::ostringstream os;
        os << what << ": mass " << sum << " not 1 within " << norm_tol;
        throw DomainError(os.str());
    }
}

}  // namespace

DiscreteDist::DiscreteDist(std::vector<Symbol> support, std::vector<double> probs,
                           double norm_tol)
    : support_(std::move(support)), probs_(std::move(probs)) {
    if (support_.size() != probs_.size())
        throw DomainError("DiscreteDist: support and probability sizes differ");
    if (support_.empty()) throw DomainError("DiscreteDist: empty support");
    std::set<Symbol> distinct(support_.begin(), support_.end());
    if (distinct.size() != support_.size())
        throw DomainError("DiscreteDist: duplicate support symbols");
    check_probability_vector(probs_, norm_tol, "DiscreteDist");
}

DiscreteDist DiscreteDist::bernoulli(double p1, Symbol zero, Symbol one) {
    if (!(p1 >= 0.0 && p1 <= 1.0)) throw DomainError("bernoulli: p outside [0, 1]");
    return DiscreteDist({std::move(zero), std::move(one)}, {1.0 - p1, p1});
}

bool DiscreteDist::same_support(const DiscreteDist& other) const {
    return support_ == other.support_;
}

namespace {

void require_same_support(const DiscreteDist& p, const DiscreteDist& q, const char* op) {
    if (!p.same_support(q)) {
        std::ostringstream os;
        os << op << ": supports differ";
        throw SupportMismatch(os.str());
    }
}

}  // namespace

double kl_divergence(const DiscreteDist& p, const DiscreteDist& q) {
    require_same_support(p, q, "kl_divergence");
    double d = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (p[i] == 0.0) continue;
        if (q[i] == 0.0) {
            std::ostringstream os;
            os << "kl_divergence: p(" << p.support()[i] << ") = " << p[i]
               << " but q is 0 there";
            throw AbsoluteContinuityViolation(os.str());
        }
        d += p[i] * std::log2(p[i] / q[i]);
    }
    return d < 0.0 && d > -tol::kIdentity ? 0.0 : d;
}

double kl_divergence_nats(const DiscreteDist& p, const DiscreteDist& q) {
    return kl_divergence(p, q) * M_LN2;
}

double tv_distance(const DiscreteDist& p, const DiscreteDist& q) {
    require_same_support(p, q, "tv_distance");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) s += std::fabs(p[i] - q[i]);
    return 0.5 * s;
}

double chi_squared(const DiscreteDist& p, const DiscreteDist& q) {
    require_same_support(p, q, "chi_squared");
    double s = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        double diff = p[i] - q[i];
        if (diff == 0.0) continue;
        if (q[i] == 0.0)
            throw AbsoluteContinuityViolation("chi_squared: q vanishes where p differs");
        s += diff * diff / q[i];
    }
    return s;
}

double entropy(const DiscreteDist& p) {
    double h = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] > 0.0) h -= p[i] * std::log2(p[i]);
    return h;
}

double binary_entropy(double x) {
    if (!(x >= 0.0 && x <= 1.0)) throw DomainError("binary_entropy: x outside [0, 1]");
    double h = 0.0;
    if (x > 0.0) h -= x * std::log2(x);
    if (x < 1.0) h -= (1.0 - x) * std::log2(1.0 - x);
    return h;
}

JointDist::JointDist(std::vector<std::vector<Symbol>> axes, std::vector<double> probs,
                     double norm_tol)
    : axes_(std::move(axes)), probs_(std::move(probs)) {
    if (axes_.empty()) throw DomainError("JointDist: no axes");
    std::size_t cells = 1;
    for (const auto& a : axes_) {
        if (a.empty()) throw DomainError("JointDist: empty axis alphabet");
        cells *= a.size();
    }
    if (cells != probs_.size())
        throw DomainError("JointDist: table size does not match axis product");
    check_probability_vector(probs_, norm_tol, "JointDist");
    strides_.assign(axes_.size(), 1);
    for (std::size_t a = axes_.size(); a-- > 1;)
        strides_[a - 1] = strides_[a] * axes_[a].size();
}

std::size_t JointDist::offset(const std::vector<std::size_t>& index) const {
    std::size_t off = 0;
    for (std::size_t a = 0; a < axes_.size(); ++a) off += strides_[a] * index[a];
    return off;
}

double JointDist::at(const std::vector<std::size_t>& index) const {
    if (index.size() != axes_.size()) throw DomainError("JointDist::at: rank mismatch");
    for (std::size_t a = 0; a < axes_.size(); ++a)
        if (index[a] >= axes_[a].size()) throw DomainError("JointDist::at: index out of range");
    return probs_[offset(index)];
}

JointDist JointDist::marginal(const std::vector<std::size_t>& keep_axes) const {
    if (keep_axes.empty()) throw DomainError("JointDist::marginal: no axes kept");
    std::vector<std::vector<Symbol>> kept;
    for (std::size_t a : keep_axes) {
        if (a >= axes_.size()) throw DomainError("JointDist::marginal: axis out of range");
        kept.push_back(axes_[a]);
    }
    std::vector<std::size_t> out_strides(keep_axes.size(), 1);
    std::size_t cells = 1;
    for (std::size_t i = keep_axes.size(); i-- > 0;) {
        out_strides[i] = cells;
        cells *= kept[i].size();
    }

    std::vector<double> out(cells, 0.0);
    std::vector<std::size_t> index(axes_.size(), 0);
    for (std::size_t flat = 0; flat < probs_.size(); ++flat) {
        std::size_t off = 0;
        for (std::size_t i = 0; i < keep_axes.size(); ++i)
            off += out_strides[i] * index[keep_axes[i]];
        out[off] += probs_[flat];
        for (std::size_t a = axes_.size(); a-- > 0;) {
            if (++index[a] < axes_[a].size()) break;
            index[a] = 0;
        }
    }
    return JointDist(std::move(kept), std::move(out), 1e-9);
}

DiscreteDist JointDist::marginal_axis(std::size_t axis) const {
    JointDist m = marginal({axis});
    return DiscreteDist(m.axes()[0], m.probs(), 1e-9);
}

double mutual_information(const JointDist& joint, const std::vector<std::size_t>& left_axes,
                          const std::vector<std::size_t>& right_axes,
                          const std::vector<std::size_t>& cond_axes) {
    std::set<std::size_t> seen;
    auto check_group = [&](const std::vector<std::size_t>& g, const char* name) {
        for (std::size_t a : g) {
            if (a >= joint.rank()) throw DomainError("mutual_information: axis out of range");
            if (!seen.insert(a).second) {
                std::ostringstream os;
                os << "mutual_information: axis " << a << " repeated in group " << name;
                throw AxisOverlap(os.str());
            }
        }
    };
    check_group(left_axes, "left");
    check_group(right_axes, "right");
    check_group(cond_axes, "cond");
    if (left_axes.empty() || right_axes.empty())
        throw DomainError("mutual_information: left and right groups must be nonempty");

    // Restrict to the involved axes, then sum p * log2(p(lrc) p(c) / (p(lc) p(rc))).
    std::vector<std::size_t> all;
    all.insert(all.end(), left_axes.begin(), left_axes.end());
    all.insert(all.end(), right_axes.begin(), right_axes.end());
    all.insert(all.end(), cond_axes.begin(), cond_axes.end());
    JointDist lrc = joint.marginal(all);

    const std::size_t nl = left_axes.size(), nr = right_axes.size(), nc = cond_axes.size();
    std::vector<std::size_t> lc_axes, rc_axes, c_axes;
    for (std::size_t i = 0; i < nl; ++i) lc_axes.push_back(i);
    for (std::size_t i = 0; i < nc; ++i) lc_axes.push_back(nl + nr + i);
    for (std::size_t i = 0; i < nr; ++i) rc_axes.push_back(nl + i);
    for (std::size_t i = 0; i < nc; ++i) rc_axes.push_back(nl + nr + i);
    for (std::size_t i = 0; i < nc; ++i) c_axes.push_back(nl + nr + i);

    JointDist lc = lrc.marginal(lc_axes);
    JointDist rc = lrc.marginal(rc_axes);

    std::vector<double> c_probs{1.0};
    std::vector<std::size_t> c_strides;
    if (nc > 0) {
        JointDist c = lrc.marginal(c_axes);
        c_probs = c.probs();
        c_strides.assign(nc, 1);
        for (std::size_t i = nc; i-- > 1;)
            c_strides[i - 1] = c_strides[i] * lrc.axis_size(nl + nr + i);
    }

    // Strides over the lc / rc marginal tables (row-major over their own axes).
    std::vector<std::size_t> lc_strides(nl + nc, 1), rc_strides(nr + nc, 1);
    {
        std::size_t acc = 1;
        for (std::size_t i = nl + nc; i-- > 0;) {
            lc_strides[i] = acc;
            acc *= (i < nl) ? lrc.axis_size(i) : lrc.axis_size(nl + nr + (i - nl));
        }
        acc = 1;
        for (std::size_t i = nr + nc; i-- > 0;) {
            rc_strides[i] = acc;
            acc *= (i < nr) ? lrc.axis_size(nl + i) : lrc.axis_size(nl + nr + (i - nr));
        }
    }

    double mi = 0.0;
    std::vector<std::size_t> index(lrc.rank(), 0);
    for (std::size_t flat = 0; flat < lrc.probs().size(); ++flat) {
        double p = lrc.probs()[flat];
        if (p > 0.0) {
            std::size_t lc_off = 0, rc_off = 0, c_off = 0;
            for (std::size_t i = 0; i < nl; ++i) lc_off += lc_strides[i] * index[i];
            for (std::size_t i = 0; i < nc; ++i) lc_off += lc_strides[nl + i] * index[nl + nr + i];
            for (std::size_t i = 0; i < nr; ++i) rc_off += rc_strides[i] * index[nl + i];
            for (std::size_t i = 0; i < nc; ++i) rc_off += rc_strides[nr + i] * index[nl + nr + i];
            for (std::size_t i = 0; i < nc; ++i) c_off += c_strides[i] * index[nl + nr + i];
            mi += p * std::log2(p * c_probs[c_off] /
                                (lc.probs()[lc_off] * rc.probs()[rc_off]));
        }
        for (std::size_t a = lrc.rank(); a-- > 0;) {
            if (++index[a] < lrc.axis_size(a)) break;
            index[a] = 0;
        }
    }
    return mi < 0.0 && mi > -tol::kIdentity ? 0.0 : mi;
}

namespace {

/// Sort (value, prob) pairs and merge values equal within merge_tol.
void merge_atoms(std::vector<std::pair<double, double>>& atoms, double merge_tol) {
    std::sort(atoms.begin(), atoms.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (out > 0 && atoms[i].first - atoms[out - 1].first <= merge_tol) {
            atoms[out - 1].second += atoms[i].second;
        } else {
            atoms[out++] = atoms[i];
        }
    }
    atoms.resize(out);
}

}  // namespace

IidSumDist iid_sum_law(const std::vector<double>& atom_values,
                       const std::vector<double>& atom_probs, int n, std::size_t atom_cap) {
    if (n < 1) throw DomainError("iid_sum_law: n must be >= 1");
    if (atom_values.size() != atom_probs.size() || atom_values.empty())
        throw DomainError("iid_sum_law: malformed atom distribution");
    check_probability_vector(atom_probs, 1e-9, "iid_sum_law atoms");

    std::vector<std::pair<double, double>> base;
    for (std::size_t i = 0; i < atom_values.size(); ++i)
        if (atom_probs[i] > 0.0) base.emplace_back(atom_values[i], atom_probs[i]);
    merge_atoms(base, tol::kAtomMerge);

    std::vector<std::pair<double, double>> acc = base;
    for (int step = 1; step < n; ++step) {
        std::size_t pairs = acc.size() * base.size();
        if (pairs > atom_cap) {
            throw Overflow("iid_sum_law: convolution support exceeds atom cap", pairs);
        }
        std::vector<std::pair<double, double>> next;
        next.reserve(pairs);
        for (const auto& [va, pa] : acc)
            for (const auto& [vb, pb] : base) next.emplace_back(va + vb, pa * pb);
        merge_atoms(next, tol::kAtomMerge);
        acc = std::move(next);
    }

    double mass = 0.0;
    for (const auto& [v, p] : acc) mass += p;
    if (std::fabs(mass - 1.0) > 1e-10)
        throw DomainError("iid_sum_law: convolution mass drifted beyond 1e-10");

    IidSumDist d;
    d.n_ = n;
    d.values_.reserve(acc.size());
    d.probs_.reserve(acc.size());
    for (const auto& [v, p] : acc) {
        d.values_.push_back(v);
        d.probs_.push_back(p);
    }
    return d;
}

double IidSumDist::tail_probability(double threshold, Tail direction) const {
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (direction == Tail::Above) {
            if (values_[i] > threshold + tol::kAtomMerge) s += probs_[i];
        } else {
            if (values_[i] < threshold - tol::kAtomMerge) s += probs_[i];
        }
    }
    return s;
}

}  // namespace covertkey

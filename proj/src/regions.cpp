#include "covertkey/regions.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#include "covertkey/errors.hpp"

namespace covertkey {

std::string region_kind_name(RegionKind kind) {
    switch (kind) {
        case RegionKind::CskInner: return "csk_inner";
        case RegionKind::CskOuter: return "csk_outer";
        case RegionKind::WskInner: return "wsk_inner";
        case RegionKind::WskOuter: return "wsk_outer";
    }
    return "unknown";
}

double RegionBoundary::max_r1() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.r1);
    return m;
}

double RegionBoundary::max_r2() const {
    double m = 0.0;
    for (const auto& p : points) m = std::max(m, p.r2);
    return m;
}

double RegionBoundary::staircase_at(double r1) const {
    double best = 0.0;
    for (const auto& p : points)
        if (p.r1 >= r1) best = std::max(best, p.r2);
    return best;
}

double RegionBoundary::polyline_at(double r1) const {
    if (points.empty()) return 0.0;
    if (r1 <= points.front().r1) return points.front().r2;
    if (r1 >= points.back().r1) return points.back().r2;
    for (std::size_t i = 1; i < points.size(); ++i) {
        if (r1 <= points[i].r1) {
            const auto& a = points[i - 1];
            const auto& b = points[i];
            double t = (r1 - a.r1) / (b.r1 - a.r1);
            return a.r2 + t * (b.r2 - a.r2);
        }
    }
    return points.back().r2;
}

std::vector<RatePair> RegionBoundary::sample_envelope(std::size_t samples) const {
    std::vector<RatePair> out;
    out.reserve(samples);
    double top = max_r1();
    for (std::size_t i = 0; i < samples; ++i) {
        double r1 = samples > 1 ? top * static_cast<double>(i) / (samples - 1) : 0.0;
        out.push_back({r1, staircase_at(r1)});
    }
    return out;
}

namespace {

double positive_part(double x) { return x > 0.0 ? x : 0.0; }

RatePair csk_corner(const BinaryMacPair& mac, double rho1, bool inner) {
    if (!(rho1 >= 0.0 && rho1 <= 1.0))
        throw DomainError("csk corner: rho1 outside [0, 1]");
    double k = kappa(mac, rho1);
    double gap1 = kl_divergence(mac.p(1), mac.p(0));
    double gap2 = kl_divergence(mac.p(2), mac.p(0));
    if (inner) {
        gap1 = positive_part(gap1 - kl_divergence(mac.q(1), mac.q(0)));
        gap2 = positive_part(gap2 - kl_divergence(mac.q(2), mac.q(0)));
    }
    return {rho1 * k * gap1, (1.0 - rho1) * k * gap2};
}

/// Keep the non-dominated points, r1 ascending, r2 strictly decreasing.
std::vector<BoundaryPoint> pareto_scan(std::vector<BoundaryPoint> pts) {
    std::sort(pts.begin(), pts.end(), [](const BoundaryPoint& a, const BoundaryPoint& b) {
        if (a.r1 != b.r1) return a.r1 > b.r1;
        return a.r2 > b.r2;
    });
    std::vector<BoundaryPoint> kept;
    double best_r2 = -1.0;
    for (const auto& p : pts) {
        if (p.r2 > best_r2) {
            kept.push_back(p);
            best_r2 = p.r2;
        }
    }
    std::reverse(kept.begin(), kept.end());
    return kept;
}

}  // namespace

RatePair csk_inner_corner(const BinaryMacPair& mac, double rho1) {
    return csk_corner(mac, rho1, true);
}

RatePair csk_outer_corner(const BinaryMacPair& mac, double rho1) {
    return csk_corner(mac, rho1, false);
}

std::vector<double> default_rho_grid(std::size_t points) {
    if (points < 2) throw DomainError("default_rho_grid: need at least 2 points");
    std::vector<double> grid(points);
    const double lo = 0.001, hi = 0.999;
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = lo + (hi - lo) * static_cast<double>(i) / (points - 1);
    return grid;
}

RegionBoundary region_union(const BinaryMacPair& mac, RegionKind kind,
                            const std::vector<double>& rho_grid) {
    if (rho_grid.empty()) throw DomainError("region_union: empty grid");
    if (kind != RegionKind::CskInner && kind != RegionKind::CskOuter)
        throw DomainError("region_union: kind must be a CSK region");
    bool inner = kind == RegionKind::CskInner;

    std::vector<BoundaryPoint> corners;
    corners.reserve(rho_grid.size());
    bool any_nonzero = false;
    for (double rho1 : rho_grid) {
        RatePair c = csk_corner(mac, rho1, inner);
        if (c.r1 > 0.0 || c.r2 > 0.0) any_nonzero = true;
        BoundaryPoint p;
        p.r1 = c.r1;
        p.r2 = c.r2;
        p.rho1 = rho1;
        corners.push_back(p);
    }
    if (!any_nonzero) throw EmptyRegion("region_union: every corner is the origin");

    RegionBoundary boundary;
    boundary.kind = kind;
    boundary.points = pareto_scan(std::move(corners));
    return boundary;
}

namespace {

JointDist wsk_joint(const BinaryMacPair& mac, const std::array<std::array<double, 2>, 2>& px) {
    // px[user][level]; axes (X1, X2, Y, Z).
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
                    probs.push_back(px[0][a] * px[1][b] * mac.w_y(a, b, y) *
                                    mac.w_z(a, b, z));
    return JointDist(std::move(axes), std::move(probs));
}

WskConstraintSet wsk_constraints_from_joint(const JointDist& joint, WskKind kind) {
    WskConstraintSet out;
    const std::vector<std::size_t> kY{2}, kZ{3};
    auto inner_bound = [&](const std::vector<std::size_t>& t,
                           const std::vector<std::size_t>& tc) {
        double gap = mutual_information(joint, t, kY, tc) - mutual_information(joint, t, kZ);
        return positive_part(gap);
    };
    auto outer_bound = [&](const std::vector<std::size_t>& t,
                           const std::vector<std::size_t>& tc) {
        // I(X_T; Y, X_Tc | Z); for T = U the conditioned side is just Y.
        std::vector<std::size_t> right = kY;
        right.insert(right.end(), tc.begin(), tc.end());
        return mutual_information(joint, t, right, kZ);
    };
    if (kind == WskKind::Inner) {
        out.bound_1 = inner_bound({0}, {1});
        out.bound_2 = inner_bound({1}, {0});
        out.bound_sum = inner_bound({0, 1}, {});
    } else {
        out.bound_1 = outer_bound({0}, {1});
        out.bound_2 = outer_bound({1}, {0});
        out.bound_sum = outer_bound({0, 1}, {});
    }
    return out;
}

double meaningful_mass(const BinaryMacPair& mac, const DiscreteDist& p_x, int user) {
    if (p_x.size() != 2 || p_x.support()[0] != mac.input_symbol(user, 0) ||
        p_x.support()[1] != mac.input_symbol(user, 1))
        throw SupportMismatch("wsk_constraints: input law support must be "
                              "{innocent, meaningful} of the channel");
    return p_x[1];
}

}  // namespace

WskConstraintSet wsk_constraints(const BinaryMacPair& mac, const DiscreteDist& p_x1,
                                 const DiscreteDist& p_x2, WskKind kind) {
    std::array<std::array<double, 2>, 2> px;
    px[0][1] = meaningful_mass(mac, p_x1, 0);
    px[0][0] = 1.0 - px[0][1];
    px[1][1] = meaningful_mass(mac, p_x2, 1);
    px[1][0] = 1.0 - px[1][1];
    return wsk_constraints_from_joint(wsk_joint(mac, px), kind);
}

WskConstraintSet wsk_constraints_joint(const BinaryMacPair& mac, const JointDist& p_x12,
                                       WskKind kind) {
    if (p_x12.rank() != 2 || p_x12.axis_size(0) != 2 || p_x12.axis_size(1) != 2)
        throw DomainError("wsk_constraints_joint: expected a 2x2 input joint");
    std::vector<std::vector<Symbol>> axes{
        {mac.input_symbol(0, 0), mac.input_symbol(0, 1)},
        {mac.input_symbol(1, 0), mac.input_symbol(1, 1)},
        mac.y_alphabet(),
        mac.z_alphabet()};
    std::vector<double> probs;
    probs.reserve(4 * mac.y_size() * mac.z_size());
    for (std::size_t a = 0; a < 2; ++a)
        for (std::size_t b = 0; b < 2; ++b)
            for (std::size_t y = 0; y < mac.y_size(); ++y)
                for (std::size_t z = 0; z < mac.z_size(); ++z)
                    probs.push_back(p_x12.at({a, b}) * mac.w_y(a, b, y) * mac.w_z(a, b, z));
    return wsk_constraints_from_joint(JointDist(std::move(axes), std::move(probs)), kind);
}

std::vector<double> default_wsk_grid(std::size_t points) {
    if (points < 2) throw DomainError("default_wsk_grid: need at least 2 points");
    std::vector<double> grid(points);
    for (std::size_t i = 0; i < points; ++i)
        grid[i] = static_cast<double>(i) / (points - 1);
    return grid;
}

namespace {

double pentagon_reach(const WskConstraintSet& b) { return std::min(b.bound_1, b.bound_sum); }

double pentagon_at(const WskConstraintSet& b, double r1) {
    if (r1 > pentagon_reach(b)) return -1.0;  // outside this cell's region
    return std::max(0.0, std::min(b.bound_2, b.bound_sum - r1));
}

/// Frontier vertices of {r1<=b1, r2<=b2, r1+r2<=bsum, r>=0}: at most two.
void pentagon_vertices(const WskConstraintSet& b, double px1, double px2,
                       std::vector<BoundaryPoint>& out) {
    double r1_hi = pentagon_reach(b);
    double r2_hi = std::min(b.bound_2, b.bound_sum);
    BoundaryPoint p;
    p.px1 = px1;
    p.px2 = px2;
    p.r1 = r1_hi;
    p.r2 = std::max(0.0, std::min(b.bound_2, b.bound_sum - r1_hi));
    out.push_back(p);
    p.r2 = r2_hi;
    p.r1 = std::max(0.0, std::min(b.bound_1, b.bound_sum - r2_hi));
    out.push_back(p);
}

}  // namespace

WskSweep wsk_region_sweep(const BinaryMacPair& mac, const std::vector<double>& px1_grid,
                          const std::vector<double>& px2_grid) {
    if (px1_grid.empty() || px2_grid.empty())
        throw DomainError("wsk_region_sweep: empty grid");

    WskSweep sweep;
    sweep.cells.reserve(px1_grid.size() * px2_grid.size());
    std::vector<BoundaryPoint> inner_pts, outer_pts;
    bool any_nonzero = false;
    for (double g1 : px1_grid) {
        for (double g2 : px2_grid) {
            std::array<std::array<double, 2>, 2> px{{{1.0 - g1, g1}, {1.0 - g2, g2}}};
            JointDist joint = wsk_joint(mac, px);
            WskCell cell;
            cell.px1 = g1;
            cell.px2 = g2;
            cell.inner = wsk_constraints_from_joint(joint, WskKind::Inner);
            cell.outer = wsk_constraints_from_joint(joint, WskKind::Outer);
            if (pentagon_reach(cell.inner) > 0.0 || cell.inner.bound_2 > 0.0 ||
                pentagon_reach(cell.outer) > 0.0 || cell.outer.bound_2 > 0.0)
                any_nonzero = true;
            pentagon_vertices(cell.inner, g1, g2, inner_pts);
            pentagon_vertices(cell.outer, g1, g2, outer_pts);
            sweep.cells.push_back(cell);
        }
    }
    if (!any_nonzero) throw EmptyRegion("wsk_region_sweep: all constraint sets are trivial");

    sweep.inner.kind = RegionKind::WskInner;
    sweep.inner.points = pareto_scan(std::move(inner_pts));
    sweep.outer.kind = RegionKind::WskOuter;
    sweep.outer.points = pareto_scan(std::move(outer_pts));
    return sweep;
}

double WskSweep::envelope_at(WskKind kind, double r1) const {
    double best = 0.0;
    for (const auto& cell : cells) {
        const WskConstraintSet& b = kind == WskKind::Inner ? cell.inner : cell.outer;
        best = std::max(best, pentagon_at(b, r1));
    }
    return best;
}

double WskSweep::max_r1(WskKind kind) const {
    double m = 0.0;
    for (const auto& cell : cells)
        m = std::max(m, pentagon_reach(kind == WskKind::Inner ? cell.inner : cell.outer));
    return m;
}

std::vector<RatePair> WskSweep::sample_envelope(WskKind kind, std::size_t samples) const {
    std::vector<RatePair> out;
    out.reserve(samples);
    double top = max_r1(kind);
    for (std::size_t i = 0; i < samples; ++i) {
        double r1 = samples > 1 ? top * static_cast<double>(i) / (samples - 1) : 0.0;
        out.push_back({r1, envelope_at(kind, r1)});
    }
    return out;
}

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

}  // namespace

void write_boundary_csv(const std::string& path, const RegionBoundary& boundary) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("write_boundary_csv: cannot write '" + path + "'");
    out << "kind,r1,r2,rho1,px1,px2\n";
    const std::string kind = region_kind_name(boundary.kind);
    for (const auto& p : boundary.points) {
        out << kind << ',' << fmt(p.r1) << ',' << fmt(p.r2) << ',';
        if (!std::isnan(p.rho1)) out << fmt(p.rho1);
        out << ',';
        if (!std::isnan(p.px1)) out << fmt(p.px1);
        out << ',';
        if (!std::isnan(p.px2)) out << fmt(p.px2);
        out << '\n';
    }
}

void write_envelope_csv(const std::string& path, RegionKind kind,
                        const std::vector<RatePair>& samples) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DomainError("write_envelope_csv: cannot write '" + path + "'");
    out << "kind,r1,r2\n";
    const std::string name = region_kind_name(kind);
    for (const auto& s : samples)
        out << name << ',' << fmt(s.r1) << ',' << fmt(s.r2) << '\n';
}

}  // namespace covertkey

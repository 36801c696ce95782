#pragma once

#include <limits>
#include <string>
#include <vector>

#include "covertkey/mac.hpp"

namespace covertkey {

struct RatePair {
    double r1 = 0.0;
    double r2 = 0.0;
};

enum class RegionKind { CskInner, CskOuter, WskInner, WskOuter };

std::string region_kind_name(RegionKind kind);

/// One Pareto point together with the parameter that achieved it.
struct BoundaryPoint {
    double r1 = 0.0;
    double r2 = 0.0;
    double rho1 = std::numeric_limits<double>::quiet_NaN();  // CSK provenance
    double px1 = std::numeric_limits<double>::quiet_NaN();   // WSK provenance
    double px2 = std::numeric_limits<double>::quiet_NaN();
};

/// Pareto frontier of a union of dominated sets: corner points sorted by r1
/// ascending with r2 strictly decreasing. Axis projections are not stored;
/// staircase_at / sample_envelope recover the full region boundary.
struct RegionBoundary {
    RegionKind kind = RegionKind::CskInner;
    std::vector<BoundaryPoint> points;

    double max_r1() const;
    double max_r2() const;

    /// Union-of-rectangles boundary: max r2 over corners with corner r1 >= r1.
    /// Returns 0 beyond the region's extent.
    double staircase_at(double r1) const;

    /// Piecewise-linear interpolation through the corner points; clamps to the
    /// first/last corner outside their span. Used when comparing the frontier
    /// against an analytic curve.
    double polyline_at(double r1) const;

    /// Evenly spaced (r1, staircase r2) samples on [0, max_r1].
    std::vector<RatePair> sample_envelope(std::size_t samples = 512) const;
};

/// Corner of R_in(rho): component i is rho_i kappa(rho) {D(P_i||P_0) - D(Q_i||Q_0)}^+.
RatePair csk_inner_corner(const BinaryMacPair& mac, double rho1);

/// Corner of R_out(rho): component i is rho_i kappa(rho) D(P_i||P_0).
RatePair csk_outer_corner(const BinaryMacPair& mac, double rho1);

/// Default sweep: 1001 uniform points on rho1 in [0.001, 0.999]. Endpoints
/// excluded so each retained point has unambiguous provenance.
std::vector<double> default_rho_grid(std::size_t points = 1001);

/// Pareto envelope of the union of corner rectangles over the grid.
/// Throws EmptyRegion if every corner is the origin.
RegionBoundary region_union(const BinaryMacPair& mac, RegionKind kind,
                            const std::vector<double>& rho_grid);

/// Per-subset rate constraints of the WSK region at one input law.
struct WskConstraintSet {
    double bound_1 = 0.0;    // T = {1}
    double bound_2 = 0.0;    // T = {2}
    double bound_sum = 0.0;  // T = {1,2}
};

enum class WskKind { Inner, Outer };

/// Inner: {I(X_T;Y|X_Tc) - I(X_T;Z)}^+ per subset. Outer: I(X_T; Y, X_Tc | Z).
/// Product input law given by per-user distributions over {innocent, meaningful}.
WskConstraintSet wsk_constraints(const BinaryMacPair& mac, const DiscreteDist& p_x1,
                                 const DiscreteDist& p_x2, WskKind kind);

/// Correlated-input variant; opt-in since the model's encoders are
/// independent. Joint axes must be (X1, X2) over each user's
/// {innocent, meaningful} alphabet.
WskConstraintSet wsk_constraints_joint(const BinaryMacPair& mac, const JointDist& p_x12,
                                       WskKind kind);

struct WskCell {
    double px1 = 0.0;  // P(X1 = meaningful)
    double px2 = 0.0;
    WskConstraintSet inner;
    WskConstraintSet outer;
};

/// Sweep result: Pareto boundaries plus the retained constraint sets, which
/// define the exact envelope of the union of pentagons.
struct WskSweep {
    std::vector<WskCell> cells;
    RegionBoundary inner;
    RegionBoundary outer;

    /// max over grid cells of min(b2, bsum - r1) for r1 within the cell's reach.
    double envelope_at(WskKind kind, double r1) const;
    double max_r1(WskKind kind) const;
    std::vector<RatePair> sample_envelope(WskKind kind, std::size_t samples = 512) const;
};

/// Default per-user Bernoulli grids: 101 meaningful-probabilities on [0, 1].
std::vector<double> default_wsk_grid(std::size_t points = 101);

WskSweep wsk_region_sweep(const BinaryMacPair& mac, const std::vector<double>& px1_grid,
                          const std::vector<double>& px2_grid);

/// CSV rows: kind,r1,r2,rho1,px1,px2 (unused provenance cells left empty).
void write_boundary_csv(const std::string& path, const RegionBoundary& boundary);

/// CSV rows: kind,r1,r2 for the discretized envelope.
void write_envelope_csv(const std::string& path, RegionKind kind,
                        const std::vector<RatePair>& samples);

}  // namespace covertkey

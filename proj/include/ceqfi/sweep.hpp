#pragma once

#include <optional>
#include <vector>

#include "ceqfi/cebound.hpp"

namespace ceqfi {

/// Maps a lower-hemisphere direction (n3 <= 0) onto the unit disk,
/// P = (n1, n2) / (1 - n3).
Eigen::Vector2d stereographic(const Direction& n);

/// Inverse map: a point of the closed unit disk back to the unit vector with
/// n3 <= 0.
Direction inverse_stereographic(double px, double py);

struct SweepPoint {
    double px = 0.0;
    double py = 0.0;
    Direction n{0.0, 0.0, -1.0};
    bool feasible = false;
    std::optional<double> alpha_min;
    bool converged = true;
};

struct BestPoint {
    double px = 0.0;
    double py = 0.0;
    Direction n{0.0, 0.0, -1.0};
    double alpha_min = 0.0;
};

struct SweepGrid {
    int resolution = 0;
    std::vector<SweepPoint> points;        // in-disk points, row-major from py = +1 down
    std::optional<BestPoint> best_raw;     // best grid point
    std::optional<BestPoint> best_refined; // after local search on the sphere
    bool all_converged = true;

    std::size_t feasible_count() const;
};

/// In-disk stereographic sample points for a res x res grid over [-1, 1]^2.
std::vector<std::pair<double, double>> disk_grid(int resolution);

/// Evaluates min ||alpha|| for every grid direction and refines the best
/// point by a local simplex search. Points are independent and evaluated in
/// parallel (capped by the CEQFI_THREADS environment variable).
SweepGrid sweep_directions(const KrausChannel& c, int resolution,
                           const SolverOptions& opts = {});

/// Maximum feasible alpha_min of the grid (refined); the effective-size
/// bound. Throws AllInfeasibleError when no grid point admits beta = 0.
double neff_bound(const KrausChannel& c, const SweepGrid& grid);

/// Number of worker threads to use, honoring CEQFI_THREADS.
unsigned thread_cap();

}  // namespace ceqfi

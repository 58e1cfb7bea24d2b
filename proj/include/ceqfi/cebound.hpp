#pragma once

#include <memory>
#include <optional>
#include <utility>
#include <vector>

#include "ceqfi/channels.hpp"

namespace ceqfi {

/// Unit vector on the Bloch sphere; the generated observable is sigma_n.
struct Direction {
    Vec3 n;

    Direction(double x, double y, double z) : Direction(Vec3(x, y, z)) {}
    explicit Direction(const Vec3& v) {
        const double len = v.norm();
        if (len < 1e-12) throw OutOfRangeError("direction vector must be nonzero");
        n = v / len;
    }

    CMat2 sigma() const { return pauli_of_axis(n); }
};

/// Hermitian generator of the unitary mixing freedom among the Kraus
/// operators of a channel.
struct GaugeHamiltonian {
    CMatX h;

    explicit GaugeHamiltonian(CMatX m, double tol = 1e-12) : h(std::move(m)) {
        if (h.rows() != h.cols()) throw DimensionMismatchError("gauge generator must be square");
        if (!is_hermitian(h, tol)) throw NonHermitianError("gauge generator must be Hermitian");
    }

    static GaugeHamiltonian zero(int dim) { return GaugeHamiltonian(CMatX::Zero(dim, dim)); }

    int dim() const { return static_cast<int>(h.rows()); }

    // Block view: scalar, first column tail, trailing sub-block.
    cxd h00() const { return h(0, 0); }
    CVecX hvec() const { return h.col(0).tail(h.rows() - 1); }
    CMatX hblock() const { return h.bottomRightCorner(h.rows() - 1, h.cols() - 1); }
};

/// alpha = k^dag h^2 k + k^dag sigma_n^2 k + 2 k^dag h sigma_n k (Hermitian PSD)
/// and beta = -k^dag (h + sigma_n) k (Hermitian).
std::pair<CMat2, CMat2> compute_alpha_beta(const KrausChannel& c, const GaugeHamiltonian& h,
                                           const Direction& n);

/// Real linear system S x = c whose solutions are the gauge parameter vectors
/// cancelling beta. Rows are Pauli components; columns are the real h
/// parameters (diagonal first, then Re/Im of the upper triangle).
struct BetaSystem {
    Eigen::MatrixXd S;
    Eigen::Vector4d c;
    int rank_S = 0;
    int rank_augmented = 0;
    bool consistent = false;
    Eigen::VectorXd x0;          // minimum-norm particular solution (empty when inconsistent)
    Eigen::MatrixXd null_basis;  // orthonormal columns spanning ker S
};

BetaSystem beta_system(const KrausChannel& c, const Direction& n);

/// Dimension of the operator space reachable by the gauge term, 1..4. A value
/// of 4 means beta can be cancelled for every observable direction.
int span_dimension(const KrausChannel& c);

/// True when at least one direction admits beta = 0.
bool feasible_anywhere(const KrausChannel& c);

/// Builds a Hermitian gauge generator from the real parameter vector used by
/// BetaSystem (diagonal entries first, then Re/Im of the upper triangle
/// row-major).
GaugeHamiltonian gauge_from_parameters(const Eigen::VectorXd& x, int dim);

struct SolverOptions {
    double temp_start = 1e-2;      // smoothing temperature schedule
    double temp_end = 1e-8;
    double temp_factor = 0.1;
    double grad_tol = 1e-11;
    int max_iterations = 20000;    // global cap
    double stall_tol = 1e-9;       // relative objective change over stall_window
    int stall_window = 50;
};

struct BoundResult {
    bool feasible = false;
    std::optional<double> alpha_min;
    std::optional<GaugeHamiltonian> h_opt;
    Direction n{0.0, 0.0, 1.0};
    bool converged = true;
    int iterations = 0;

    double n_eff_bound() const;
    double qfi_bound(int n_qubits) const;  // 4 N alpha_min
};

/// Minimizes ||alpha|| over the affine subspace of gauge generators with
/// beta = 0. Any feasible iterate is a valid upper bound; the convergence
/// flag only qualifies tightness.
BoundResult minimize_alpha_norm(const KrausChannel& c, const Direction& n,
                                const SolverOptions& opts = {});

/// Caches the direction-independent part of the minimization so grids of
/// directions reuse the channel setup.
class BoundSolver {
public:
    explicit BoundSolver(const KrausChannel& c, const SolverOptions& opts = {});
    ~BoundSolver();
    BoundSolver(BoundSolver&&) noexcept;
    BoundSolver& operator=(BoundSolver&&) noexcept;

    BoundResult solve(const Direction& n) const;
    BetaSystem system(const Direction& n) const;
    int span_dimension() const;
    bool feasible_anywhere() const;

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// 4 { N ||alpha|| + N (N-1) ||beta||^2 } for a given gauge generator.
double ce_bound_general(const KrausChannel& c, const GaugeHamiltonian& h, const Direction& n,
                        int n_qubits);

enum class AnalyticFamily {
    AmplitudeDamping,
    Depolarizing,
    PauliFullSmallP,
    PauliRank2SmallP,
};

struct AnalyticResult {
    double value = 0.0;
    std::string warning;  // set when a small-noise formula is used outside its regime
};

/// Closed-form effective-size bounds. Without a direction the result is
/// maximized over the observable direction; with one it is evaluated there.
AnalyticResult analytic_bound_ex(AnalyticFamily family, const std::vector<double>& params,
                                 const std::optional<Direction>& n = {});
double analytic_bound(AnalyticFamily family, const std::vector<double>& params,
                      const std::optional<Direction>& n = {});

}  // namespace ceqfi

#include "ceqfi/cebound.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace ceqfi {

namespace {

constexpr double kRankTol = 1e-10;  // singular values below this count as zero

int parameter_count(int dim) { return dim * dim; }

// Hermitian parameter basis: diagonal entries first, then (Re, Im) for each
// upper-triangle entry row-major.
CMatX parameter_matrix(int u, int dim) {
    CMatX m = CMatX::Zero(dim, dim);
    if (u < dim) {
        m(u, u) = 1.0;
        return m;
    }
    int idx = u - dim;
    for (int a = 0; a < dim; ++a) {
        for (int b = a + 1; b < dim; ++b) {
            if (idx == 0) {
                m(a, b) = 1.0;
                m(b, a) = 1.0;
                return m;
            }
            if (idx == 1) {
                m(a, b) = cxd(0.0, 1.0);
                m(b, a) = cxd(0.0, -1.0);
                return m;
            }
            idx -= 2;
        }
    }
    throw OutOfRangeError("gauge parameter index out of range");
}

Eigen::Vector4d pauli_real(const CMat2& m) {
    const auto a = pauli_decompose(m);
    return Eigen::Vector4d(a[0].real(), a[1].real(), a[2].real(), a[3].real());
}

int svd_rank(const Eigen::VectorXd& singular_values) {
    int rank = 0;
    for (Eigen::Index i = 0; i < singular_values.size(); ++i)
        if (singular_values(i) > kRankTol) ++rank;
    return rank;
}

}  // namespace

GaugeHamiltonian gauge_from_parameters(const Eigen::VectorXd& x, int dim) {
    if (x.size() != parameter_count(dim))
        throw DimensionMismatchError("gauge parameter vector has the wrong size");
    CMatX h = CMatX::Zero(dim, dim);
    int u = 0;
    for (int a = 0; a < dim; ++a) h(a, a) = x(u++);
    for (int a = 0; a < dim; ++a) {
        for (int b = a + 1; b < dim; ++b) {
            h(a, b) = cxd(x(u), x(u + 1));
            h(b, a) = std::conj(h(a, b));
            u += 2;
        }
    }
    return GaugeHamiltonian(std::move(h));
}

std::pair<CMat2, CMat2> compute_alpha_beta(const KrausChannel& c, const GaugeHamiltonian& h,
                                           const Direction& n) {
    const int d = c.kraus_count();
    if (h.dim() != d)
        throw DimensionMismatchError("gauge generator dimension does not match the Kraus count");

    const CMat2 hn = n.sigma();
    CMat2 alpha = CMat2::Zero();
    CMat2 gauge_term = CMat2::Zero();
    CMat2 drift_term = CMat2::Zero();
    for (int i = 0; i < d; ++i) {
        CMat2 dk = hn * c.op(i);
        for (int j = 0; j < d; ++j) dk += h.h(i, j) * c.op(j);
        // dK_i = -i (h + sigma_n) k restricted to row i; the -i drops out of
        // dK^dag dK.
        alpha += dk.adjoint() * dk;
        for (int j = 0; j < d; ++j) gauge_term += h.h(i, j) * c.op(i).adjoint() * c.op(j);
        drift_term += c.op(i).adjoint() * hn * c.op(i);
    }
    alpha = 0.5 * (alpha + alpha.adjoint());
    CMat2 beta = -(gauge_term + drift_term);
    beta = 0.5 * (beta + beta.adjoint());
    return {alpha, beta};
}

// ---------------------------------------------------------------------------
// Channel-level cache for the minimization
// ---------------------------------------------------------------------------

struct BoundSolver::Impl {
    KrausChannel channel;
    SolverOptions opts;
    int d = 0;
    int n_params = 0;

    std::vector<CMatX> mu;                 // per-parameter derivative blocks (2d x 2)
    std::array<Eigen::MatrixXd, 4> quad;   // quadratic forms A_j over the full parameters
    Eigen::MatrixXd S;                     // 4 x n_params
    Eigen::Matrix<double, 4, 3> mh;        // c(n) = -mh * n
    Eigen::MatrixXd u_range;               // 4 x rank_S, orthonormal basis of range(S)
    Eigen::MatrixXd v_range;               // n_params x rank_S
    Eigen::VectorXd sigma_range;           // rank_S singular values
    Eigen::MatrixXd null_basis;            // n_params x n_null
    std::array<Eigen::MatrixXd, 4> quad_reduced;  // Z^T A_j Z
    int rank_S = 0;

    Impl(const KrausChannel& c, const SolverOptions& o) : channel(c), opts(o) {
        d = channel.kraus_count();
        n_params = parameter_count(d);

        mu.reserve(static_cast<std::size_t>(n_params));
        for (int u = 0; u < n_params; ++u) {
            const CMatX hu = parameter_matrix(u, d);
            CMatX block = CMatX::Zero(2 * d, 2);
            for (int i = 0; i < d; ++i) {
                CMat2 row = CMat2::Zero();
                for (int j = 0; j < d; ++j) row += hu(i, j) * channel.op(j);
                block.block<2, 2>(2 * i, 0) = cxd(0.0, -1.0) * row;
            }
            mu.push_back(std::move(block));
        }

        for (int j = 0; j < 4; ++j) quad[j].setZero(n_params, n_params);
        for (int u = 0; u < n_params; ++u) {
            for (int v = u; v < n_params; ++v) {
                const CMat2 prod = mu[static_cast<std::size_t>(u)].adjoint() *
                                   mu[static_cast<std::size_t>(v)];
                for (int j = 0; j < 4; ++j) {
                    const double t = 0.5 * (prod * pauli(j)).trace().real();
                    quad[j](u, v) = t;
                    quad[j](v, u) = t;
                }
            }
        }

        S.setZero(4, n_params);
        for (int u = 0; u < n_params; ++u) {
            const CMatX hu = parameter_matrix(u, d);
            CMat2 t = CMat2::Zero();
            for (int i = 0; i < d; ++i)
                for (int j = 0; j < d; ++j)
                    t += hu(i, j) * channel.op(i).adjoint() * channel.op(j);
            S.col(u) = pauli_real(t);
        }

        for (int l = 0; l < 3; ++l) {
            Vec3 axis = Vec3::Zero();
            axis(l) = 1.0;
            const CMat2 sig = pauli_of_axis(axis);
            CMat2 t = CMat2::Zero();
            for (int i = 0; i < d; ++i) t += channel.op(i).adjoint() * sig * channel.op(i);
            mh.col(l) = pauli_real(t);
        }

        Eigen::JacobiSVD<Eigen::MatrixXd> svd(S, Eigen::ComputeFullU | Eigen::ComputeFullV);
        rank_S = svd_rank(svd.singularValues());
        u_range = svd.matrixU().leftCols(rank_S);
        v_range = svd.matrixV().leftCols(rank_S);
        sigma_range = svd.singularValues().head(rank_S);
        null_basis = svd.matrixV().rightCols(n_params - rank_S);

        for (int j = 0; j < 4; ++j)
            quad_reduced[j] = null_basis.transpose() * quad[j] * null_basis;
    }

    BetaSystem make_system(const Direction& n) const {
        BetaSystem bs;
        bs.S = S;
        bs.c = -(mh * n.n);
        bs.rank_S = rank_S;

        Eigen::MatrixXd augmented(4, n_params + 1);
        augmented.leftCols(n_params) = S;
        augmented.col(n_params) = bs.c;
        Eigen::JacobiSVD<Eigen::MatrixXd> svd(augmented);
        bs.rank_augmented = svd_rank(svd.singularValues());
        bs.consistent = (bs.rank_augmented == bs.rank_S);
        bs.null_basis = null_basis;
        if (bs.consistent) {
            const Eigen::VectorXd coeffs =
                (u_range.transpose() * bs.c).cwiseQuotient(sigma_range);
            bs.x0 = v_range * coeffs;
        }
        return bs;
    }
};

BoundSolver::BoundSolver(const KrausChannel& c, const SolverOptions& opts)
    : impl_(std::make_unique<Impl>(c, opts)) {}
BoundSolver::~BoundSolver() = default;
BoundSolver::BoundSolver(BoundSolver&&) noexcept = default;
BoundSolver& BoundSolver::operator=(BoundSolver&&) noexcept = default;

BetaSystem BoundSolver::system(const Direction& n) const { return impl_->make_system(n); }

int BoundSolver::span_dimension() const { return impl_->rank_S; }

bool BoundSolver::feasible_anywhere() const {
    const Eigen::MatrixXd residual =
        impl_->mh - impl_->u_range * (impl_->u_range.transpose() * impl_->mh);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(residual);
    return svd_rank(svd.singularValues()) < 3;
}

namespace {

// Smoothed largest eigenvalue of alpha in the reduced coordinates:
// f(y) = q0(y) + C(y) + temp * log1p(exp(-2 C / temp)), the soft maximum of
// the two eigenvalues q0 +- C.
struct ReducedProblem {
    const std::array<Eigen::MatrixXd, 4>& B;
    std::array<Eigen::VectorXd, 4> lin;
    std::array<double, 4> constant{};

    explicit ReducedProblem(const std::array<Eigen::MatrixXd, 4>& b) : B(b) {}

    std::array<double, 4> components(const Eigen::VectorXd& y) const {
        std::array<double, 4> q;
        for (int j = 0; j < 4; ++j)
            q[j] = y.dot(B[j] * y) + lin[j].dot(y) + constant[j];
        return q;
    }

    double exact_norm(const Eigen::VectorXd& y) const {
        const auto q = components(y);
        return std::abs(q[0]) + std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
    }

    double smoothed(const Eigen::VectorXd& y, double temp) const {
        const auto q = components(y);
        const double c = std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        return q[0] + c + temp * std::log1p(std::exp(-2.0 * c / temp));
    }

    void derivatives(const Eigen::VectorXd& y, double temp, double& f, Eigen::VectorXd& grad,
                     Eigen::MatrixXd& hess) const {
        const Eigen::Index ny = y.size();
        const auto q = components(y);
        std::array<Eigen::VectorXd, 4> dq;
        for (int j = 0; j < 4; ++j) dq[j] = 2.0 * (B[j] * y) + lin[j];

        const double c = std::sqrt(q[1] * q[1] + q[2] * q[2] + q[3] * q[3]);
        f = q[0] + c + temp * std::log1p(std::exp(-2.0 * c / temp));

        Eigen::VectorXd u = Eigen::VectorXd::Zero(ny);
        for (int j = 1; j < 4; ++j) u += q[j] * dq[j];

        const double t = std::tanh(c / temp);
        const double t_over_c = (c > 1e-150) ? t / c : 1.0 / temp;

        grad = dq[0] + t_over_c * u;

        hess = 2.0 * B[0];
        Eigen::MatrixXd inner = Eigen::MatrixXd::Zero(ny, ny);
        for (int j = 1; j < 4; ++j)
            inner += dq[j] * dq[j].transpose() + 2.0 * q[j] * B[j];
        hess += t_over_c * inner;
        if (c > 1e-150) {
            const double coef = (1.0 - t * t) / (temp * c * c) - t / (c * c * c);
            hess += coef * (u * u.transpose());
        }
    }
};

}  // namespace

BoundResult BoundSolver::solve(const Direction& n) const {
    const Impl& ctx = *impl_;
    BoundResult result;
    result.n = n;

    const BetaSystem bs = ctx.make_system(n);
    if (!bs.consistent) {
        result.feasible = false;
        return result;
    }
    result.feasible = true;

    // Offset block M0 (the direction term) and the induced linear/constant
    // parts of the four Pauli components of alpha.
    const CMat2 hn = n.sigma();
    CMatX m0 = CMatX::Zero(2 * ctx.d, 2);
    for (int i = 0; i < ctx.d; ++i)
        m0.block<2, 2>(2 * i, 0) = cxd(0.0, -1.0) * (hn * ctx.channel.op(i));

    std::array<Eigen::VectorXd, 4> g;
    std::array<double, 4> c0;
    for (int j = 0; j < 4; ++j) {
        g[j].resize(ctx.n_params);
        for (int u = 0; u < ctx.n_params; ++u)
            g[j](u) = (m0.adjoint() * ctx.mu[static_cast<std::size_t>(u)] * pauli(j))
                          .trace()
                          .real();
        c0[j] = 0.5 * (m0.adjoint() * m0 * pauli(j)).trace().real();
    }

    ReducedProblem problem(ctx.quad_reduced);
    const Eigen::MatrixXd& z = ctx.null_basis;
    for (int j = 0; j < 4; ++j) {
        problem.lin[j] = z.transpose() * (2.0 * (ctx.quad[j] * bs.x0) + g[j]);
        problem.constant[j] = bs.x0.dot(ctx.quad[j] * bs.x0) + g[j].dot(bs.x0) + c0[j];
    }

    const Eigen::Index ny = z.cols();
    Eigen::VectorXd y = Eigen::VectorXd::Zero(ny);
    int iterations = 0;
    bool hit_cap = false;

    if (ny > 0) {
        std::vector<double> history;
        for (double temp = ctx.opts.temp_start; temp >= ctx.opts.temp_end * 0.999;
             temp *= ctx.opts.temp_factor) {
            for (;;) {
                if (iterations >= ctx.opts.max_iterations) {
                    hit_cap = true;
                    break;
                }
                double f;
                Eigen::VectorXd grad;
                Eigen::MatrixXd hess;
                problem.derivatives(y, temp, f, grad, hess);
                history.push_back(f);

                if (grad.norm() <= ctx.opts.grad_tol * std::max(1.0, std::abs(f))) break;
                if (history.size() > static_cast<std::size_t>(ctx.opts.stall_window)) {
                    const double past =
                        history[history.size() - 1 - static_cast<std::size_t>(ctx.opts.stall_window)];
                    if (std::abs(past - f) <= ctx.opts.stall_tol * std::max(1.0, std::abs(f)))
                        break;
                }

                // Damped Newton step; the smoothed objective can lose
                // convexity at large temperature, so escalate the damping
                // until the step descends.
                double damping = 0.0;
                const double scale = std::max(1.0, hess.cwiseAbs().maxCoeff());
                Eigen::VectorXd step;
                bool have_step = false;
                for (int attempt = 0; attempt < 60; ++attempt) {
                    Eigen::MatrixXd h = hess;
                    if (damping > 0.0)
                        h += damping * Eigen::MatrixXd::Identity(ny, ny);
                    Eigen::LDLT<Eigen::MatrixXd> ldlt(h);
                    if (ldlt.info() == Eigen::Success) {
                        step = ldlt.solve(-grad);
                        if (step.dot(grad) < 0.0 && step.allFinite()) {
                            have_step = true;
                            break;
                        }
                    }
                    damping = (damping == 0.0) ? 1e-12 * scale : damping * 10.0;
                }
                if (!have_step) step = -grad;

                const double slope = grad.dot(step);
                double stepsize = 1.0;
                bool moved = false;
                for (int ls = 0; ls < 60; ++ls) {
                    const double trial = problem.smoothed(y + stepsize * step, temp);
                    if (trial <= f + 1e-4 * stepsize * slope) {
                        y += stepsize * step;
                        moved = true;
                        break;
                    }
                    stepsize *= 0.5;
                }
                ++iterations;
                if (!moved) break;  // no further progress at this temperature
            }
            if (hit_cap) break;
        }
    }

    const Eigen::VectorXd x = bs.x0 + z * y;
    GaugeHamiltonian h_opt = gauge_from_parameters(x, ctx.d);
    const auto [alpha, beta] = compute_alpha_beta(ctx.channel, h_opt, n);
    if (op_norm2(beta) > 1e-8)
        throw Error("internal: residual beta after constrained minimization");

    result.alpha_min = op_norm2(alpha);
    result.h_opt = std::move(h_opt);
    result.iterations = iterations;
    result.converged = !hit_cap;
    return result;
}

BetaSystem beta_system(const KrausChannel& c, const Direction& n) {
    return BoundSolver(c).system(n);
}

int span_dimension(const KrausChannel& c) { return BoundSolver(c).span_dimension(); }

bool feasible_anywhere(const KrausChannel& c) { return BoundSolver(c).feasible_anywhere(); }

BoundResult minimize_alpha_norm(const KrausChannel& c, const Direction& n,
                                const SolverOptions& opts) {
    return BoundSolver(c, opts).solve(n);
}

double BoundResult::n_eff_bound() const {
    if (!feasible || !alpha_min) throw AllInfeasibleError("no linear bound at this direction");
    return *alpha_min;
}

double BoundResult::qfi_bound(int n_qubits) const {
    if (n_qubits < 1) throw OutOfRangeError("qubit count must be positive");
    return 4.0 * n_qubits * n_eff_bound();
}

double ce_bound_general(const KrausChannel& c, const GaugeHamiltonian& h, const Direction& n,
                        int n_qubits) {
    if (n_qubits < 1) throw OutOfRangeError("qubit count must be positive");
    const auto [alpha, beta] = compute_alpha_beta(c, h, n);
    const double na = op_norm2(alpha);
    const double nb = op_norm2(beta);
    const double nn = static_cast<double>(n_qubits);
    return 4.0 * (nn * na + nn * (nn - 1.0) * nb * nb);
}

// ---------------------------------------------------------------------------
// Closed forms
// ---------------------------------------------------------------------------

namespace {

double amplitude_damping_norm(double p, const Vec3& n) {
    const double n3 = n.z();
    const double a0 = (1.0 / p - 2.0 * p) * n3 * n3 + 1.0 / p + 2.0 * p - 2.0;
    const double a1 = -2.0 * std::sqrt(1.0 - p) / p * n.x() * n3;
    const double a2 = -2.0 * std::sqrt(1.0 - p) / p * n.y() * n3;
    const double a3 = (2.0 * p - 2.0 / p) * n3 * n3 - 2.0 * p + 2.0;
    return std::abs(a0) + std::sqrt(a1 * a1 + a2 * a2 + a3 * a3);
}

std::array<double, 3> full_rank_smallp_coeffs(const std::vector<double>& p) {
    // coeff_i = (p_j + p_k) / (4 p_j p_k + 4 p_i (p_j + p_k)) with {i,j,k}
    // a permutation of {1,2,3}.
    std::array<double, 3> coeff{};
    for (int i = 0; i < 3; ++i) {
        const int j = (i + 1) % 3;
        const int k = (i + 2) % 3;
        const double pj = p[static_cast<std::size_t>(j)];
        const double pk = p[static_cast<std::size_t>(k)];
        const double pi = p[static_cast<std::size_t>(i)];
        coeff[static_cast<std::size_t>(i)] =
            (pj + pk) / (4.0 * pj * pk + 4.0 * pi * (pj + pk));
    }
    return coeff;
}

}  // namespace

AnalyticResult analytic_bound_ex(AnalyticFamily family, const std::vector<double>& params,
                                 const std::optional<Direction>& n) {
    AnalyticResult out;
    switch (family) {
        case AnalyticFamily::AmplitudeDamping: {
            if (params.size() != 1 || !(params[0] > 0.0 && params[0] < 1.0))
                throw OutOfDomainError("amplitude damping bound requires a single p in (0, 1)");
            const double p = params[0];
            if (n) {
                out.value = amplitude_damping_norm(p, n->n);
            } else if (p <= 1.0 / std::sqrt(2.0)) {
                out.value = 4.0 / p - 4.0;
            } else {
                out.value = 3.0 / p - 1.0 / (p * p) + (2.0 - 3.0 * p) / (p * p + p - 1.0);
            }
            return out;
        }
        case AnalyticFamily::Depolarizing: {
            if (params.size() != 1 || !(params[0] > 0.0 && params[0] < 0.75))
                throw OutOfDomainError("depolarizing bound requires a single p in (0, 0.75)");
            const double p = params[0];
            out.value = 1.0 / (2.0 * p) + 1.0 / (9.0 - 8.0 * p) - 1.0;
            return out;
        }
        case AnalyticFamily::PauliFullSmallP: {
            if (params.size() != 3)
                throw OutOfDomainError("full-rank small-noise bound requires (p1, p2, p3)");
            double sum = 0.0;
            for (double v : params) {
                if (!(v > 0.0)) throw OutOfDomainError("noise probabilities must be positive");
                sum += v;
                if (v > 0.01)
                    out.warning = "small-noise expansion used with a probability above 0.01";
            }
            if (sum >= 1.0) throw OutOfDomainError("noise probabilities must sum below one");
            const auto coeff = full_rank_smallp_coeffs(params);
            if (n) {
                out.value = coeff[0] * n->n.x() * n->n.x() + coeff[1] * n->n.y() * n->n.y() +
                            coeff[2] * n->n.z() * n->n.z();
            } else {
                out.value = *std::max_element(coeff.begin(), coeff.end());
            }
            return out;
        }
        case AnalyticFamily::PauliRank2SmallP: {
            if (params.size() != 2)
                throw OutOfDomainError("two-noise small-noise bound requires (p1, p2)");
            const double p1 = params[0];
            const double p2 = params[1];
            if (!(p1 > 0.0) || !(p2 > 0.0) || p1 + p2 >= 1.0)
                throw OutOfDomainError("noise probabilities must be positive and sum below one");
            if (p1 > 0.01 || p2 > 0.01)
                out.warning = "small-noise expansion used with a probability above 0.01";
            if (n) {
                out.value = n->n.x() * n->n.x() / (4.0 * p1) + n->n.y() * n->n.y() / (4.0 * p2) +
                            n->n.z() * n->n.z() * 0.25 * (1.0 / p1 + 1.0 / p2);
            } else {
                out.value = 0.25 * (1.0 / p1 + 1.0 / p2);
            }
            return out;
        }
    }
    throw OutOfDomainError("unknown analytic family");
}

double analytic_bound(AnalyticFamily family, const std::vector<double>& params,
                      const std::optional<Direction>& n) {
    return analytic_bound_ex(family, params, n).value;
}

}  // namespace ceqfi

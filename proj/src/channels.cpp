#include "ceqfi/channels.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace ceqfi {

namespace {

constexpr double kGramZeroTol = 1e-10;   // Gram eigenvalues below this are zero
constexpr double kOrthogonalTol = 1e-10;
constexpr double kHermitianTol = 1e-12;

Eigen::MatrixXcd gram_matrix(const std::vector<CMat2>& ops) {
    const Eigen::Index n = static_cast<Eigen::Index>(ops.size());
    Eigen::MatrixXcd g(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            g(i, j) = (ops[static_cast<std::size_t>(i)].adjoint() *
                       ops[static_cast<std::size_t>(j)])
                          .trace();
    return g;
}

double max_offdiag(const Eigen::MatrixXcd& g) {
    double m = 0.0;
    for (Eigen::Index i = 0; i < g.rows(); ++i)
        for (Eigen::Index j = 0; j < g.cols(); ++j)
            if (i != j) m = std::max(m, std::abs(g(i, j)));
    return m;
}

int gram_rank(const std::vector<CMat2>& ops) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram_matrix(ops));
    int rank = 0;
    for (Eigen::Index i = 0; i < solver.eigenvalues().size(); ++i)
        if (solver.eigenvalues()(i) > kGramZeroTol) ++rank;
    return rank;
}

bool hermitian_psd(const CMat2& m, double tol) {
    if (!is_hermitian(m, tol)) return false;
    const auto a = pauli_decompose(0.5 * (m + m.adjoint()));
    const double c = std::sqrt(a[1].real() * a[1].real() + a[2].real() * a[2].real() +
                               a[3].real() * a[3].real());
    return a[0].real() + tol >= c;
}

bool canonical_form(const std::vector<CMat2>& ops) {
    if (ops.empty()) return false;
    if (!hermitian_psd(ops[0], 1e-10) || ops[0].trace().real() <= 0.0) return false;
    if (max_offdiag(gram_matrix(ops)) > kOrthogonalTol) return false;
    if (ops.size() == 2 && std::abs(pauli_decompose(ops[1])[0]) > kOrthogonalTol) return false;
    return true;
}

// Global unitary that turns m into its positive polar factor.
CMat2 polar_fix(const CMat2& m) {
    Eigen::JacobiSVD<CMat2> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
    return svd.matrixV() * svd.matrixU().adjoint();
}

// Multiplies op by a phase making its largest Pauli coefficient real positive.
CMat2 phase_normalize(const CMat2& op) {
    const auto a = pauli_decompose(op);
    int lead = 0;
    for (int i = 1; i < 4; ++i)
        if (std::abs(a[i]) > std::abs(a[lead])) lead = i;
    const double mag = std::abs(a[lead]);
    if (mag < 1e-300) return op;
    return op * (std::conj(a[lead]) / mag);
}

}  // namespace

KrausChannel KrausChannel::pauli(const std::vector<double>& p) {
    if (p.size() < 2 || p.size() > 4)
        throw InvalidProbabilitiesError("pauli channel expects 2 to 4 probabilities");
    double sum = 0.0;
    for (double v : p) {
        if (v < 0.0) throw InvalidProbabilitiesError("pauli channel probabilities must be nonnegative");
        sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
        throw InvalidProbabilitiesError("pauli channel probabilities must sum to one");
    if (p[0] <= 0.0) throw InvalidProbabilitiesError("pauli channel requires p_0 > 0");

    KrausChannel c;
    c.family_ = ChannelFamily::Pauli;
    c.params_.assign(4, 0.0);
    for (std::size_t i = 0; i < p.size(); ++i) {
        c.params_[i] = p[i];
        if (p[i] > 0.0)
            c.ops_.push_back(std::sqrt(p[i]) * ceqfi::pauli(static_cast<int>(i)));
    }
    c.canonical_ = true;
    return c;
}

KrausChannel KrausChannel::amplitude_damping(double p) {
    if (!(p > 0.0 && p < 1.0))
        throw OutOfRangeError(
            "amplitude damping requires 0 < p < 1 (the p = 0 identity limit is a Pauli channel)");
    CMat2 k0, k1;
    k0 << 1.0, 0.0, 0.0, std::sqrt(1.0 - p);
    k1 << 0.0, std::sqrt(p), 0.0, 0.0;

    KrausChannel c;
    c.family_ = ChannelFamily::AmplitudeDamping;
    c.params_ = {p};
    c.ops_ = {k0, k1};
    c.canonical_ = true;
    return c;
}

KrausChannel KrausChannel::from_ops(std::vector<CMat2> ops, double trace_tol) {
    KrausChannel c = unchecked(std::move(ops));
    const double dev = c.trace_deviation();
    if (dev > trace_tol) {
        std::ostringstream os;
        os << "Kraus list is not trace preserving: deviation " << dev;
        throw ValidationError(os.str());
    }
    return c;
}

KrausChannel KrausChannel::unchecked(std::vector<CMat2> ops) {
    if (ops.empty()) throw ValidationError("a channel needs at least one Kraus operator");
    KrausChannel c;
    c.ops_ = std::move(ops);
    c.canonical_ = canonical_form(c.ops_);
    return c;
}

int KrausChannel::rank() const { return gram_rank(ops_); }

std::vector<double> KrausChannel::weights() const {
    std::vector<double> w;
    w.reserve(ops_.size());
    for (const auto& k : ops_) w.push_back((k.adjoint() * k).trace().real());
    return w;
}

CMat2 KrausChannel::apply(const CMat2& rho) const {
    CMat2 out = CMat2::Zero();
    for (const auto& k : ops_) out += k * rho * k.adjoint();
    return out;
}

double KrausChannel::trace_deviation() const {
    CMat2 sum = CMat2::Zero();
    for (const auto& k : ops_) sum += k.adjoint() * k;
    return op_norm2(sum - CMat2::Identity());
}

ValidationReport validate_channel(const KrausChannel& c) {
    ValidationReport report;
    report.trace_deviation = c.trace_deviation();
    report.rank = c.rank();
    report.canonical = canonical_form(c.ops());
    return report;
}

KrausChannel canonicalize(const KrausChannel& c) {
    std::vector<CMat2> ops = c.ops();
    CMat2 frame = c.frame();

    // Gram eigenvalues below tolerance mean the declared rank overstates the
    // number of independent operators.
    Eigen::MatrixXcd gram = gram_matrix(ops);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> solver(gram);
    if (solver.eigenvalues().minCoeff() <= kGramZeroTol)
        throw DegenerateChannelError("Kraus operators are linearly dependent");

    if (max_offdiag(gram) > kHermitianTol) {
        const Eigen::MatrixXcd u = solver.eigenvectors();
        const Eigen::Index n = static_cast<Eigen::Index>(ops.size());
        std::vector<CMat2> mixed(ops.size(), CMat2::Zero());
        // Columns ordered by descending weight; new_a = sum_i U(i, a) k_i keeps
        // the Gram matrix diagonal.
        for (Eigen::Index a = 0; a < n; ++a) {
            const Eigen::Index col = n - 1 - a;
            for (Eigen::Index i = 0; i < n; ++i)
                mixed[static_cast<std::size_t>(a)] += u(i, col) * ops[static_cast<std::size_t>(i)];
        }
        ops = std::move(mixed);
    }

    // k_0 is the operator carrying the largest identity component; ties go to
    // the larger weight. The rest keep their relative order.
    {
        std::size_t lead = 0;
        double best_tr = -1.0;
        double best_w = -1.0;
        for (std::size_t i = 0; i < ops.size(); ++i) {
            const double tr = std::abs(ops[i].trace());
            const double w = (ops[i].adjoint() * ops[i]).trace().real();
            if (tr > best_tr + 1e-9 || (std::abs(tr - best_tr) <= 1e-9 && w > best_w)) {
                lead = i;
                best_tr = tr;
                best_w = w;
            }
        }
        if (lead != 0) std::rotate(ops.begin(), ops.begin() + static_cast<std::ptrdiff_t>(lead),
                                   ops.begin() + static_cast<std::ptrdiff_t>(lead) + 1);
    }

    for (std::size_t i = 1; i < ops.size(); ++i) ops[i] = phase_normalize(ops[i]);

    if (!hermitian_psd(ops[0], kHermitianTol)) {
        const CMat2 g = polar_fix(ops[0]);
        for (auto& k : ops) k = g * k;
        frame = g * frame;
    }

    // Single noise operator: rotate the Kraus pair until k_1 has no identity
    // component, re-fixing the polar factor of k_0 after each pass.
    if (ops.size() == 2) {
        for (int iter = 0; iter < 500; ++iter) {
            const cxd mu0 = pauli_decompose(ops[0])[0];
            const cxd nu0 = pauli_decompose(ops[1])[0];
            const bool k0_ok = hermitian_psd(ops[0], kHermitianTol);
            if (std::abs(nu0) <= 1e-14 && k0_ok) break;

            const double s = std::sqrt(std::norm(mu0) + std::norm(nu0));
            if (s > 1e-300 && std::abs(nu0) > 1e-16) {
                const CMat2 q0 = (std::conj(mu0) * ops[0] + std::conj(nu0) * ops[1]) / s;
                const CMat2 q1 = (-nu0 * ops[0] + mu0 * ops[1]) / s;
                ops[0] = q0;
                ops[1] = q1;
            }
            if (!hermitian_psd(ops[0], kHermitianTol)) {
                const CMat2 g = polar_fix(ops[0]);
                for (auto& k : ops) k = g * k;
                frame = g * frame;
            }
        }
        if (std::abs(pauli_decompose(ops[1])[0]) > 1e-10 ||
            !hermitian_psd(ops[0], 1e-10))
            throw DegenerateChannelError("canonical form iteration failed to settle");
        ops[1] = phase_normalize(ops[1]);
    }

    KrausChannel out;
    out.ops_ = std::move(ops);
    out.family_ = c.family();
    out.params_ = c.family_params();
    out.canonical_ = true;
    out.frame_ = frame;
    return out;
}

Rank1Params rank1_params(const KrausChannel& c) {
    if (c.kraus_count() != 2 || c.rank() != 2)
        throw WrongRankError("rank1_params expects a channel with exactly one noise operator");
    if (!c.canonical()) throw WrongRankError("rank1_params expects a canonical channel");

    const auto a = pauli_decompose(c.op(1));
    if (std::abs(a[0]) > 1e-9)
        throw WrongRankError("noise operator carries an identity component; canonicalize first");

    const Vec3 re(a[1].real(), a[2].real(), a[3].real());
    const Vec3 im(a[1].imag(), a[2].imag(), a[3].imag());

    Rank1Params out;
    Vec3 e1, e2;
    if (re.norm() > 1e-12) {
        e1 = re.normalized();
        const double par = im.dot(e1);
        const Vec3 perp = im - par * e1;
        out.lambda2 = perp.norm();
        if (out.lambda2 > 1e-12) {
            e2 = perp.normalized();
        } else {
            // Any axis orthogonal to e1; take the coordinate axis least aligned.
            int least = 0;
            for (int i = 1; i < 3; ++i)
                if (std::abs(e1(i)) < std::abs(e1(least))) least = i;
            Vec3 seed = Vec3::Zero();
            seed(least) = 1.0;
            e2 = (seed - seed.dot(e1) * e1).normalized();
        }
        out.lambda1 = cxd(re.norm(), par);
    } else {
        // Purely imaginary noise vector: a Pauli rotation along im.
        e1 = im.normalized();
        out.lambda1 = cxd(0.0, im.norm());
        out.lambda2 = 0.0;
        int least = 0;
        for (int i = 1; i < 3; ++i)
            if (std::abs(e1(i)) < std::abs(e1(least))) least = i;
        Vec3 seed = Vec3::Zero();
        seed(least) = 1.0;
        e2 = (seed - seed.dot(e1) * e1).normalized();
    }

    out.a = 1.0 - std::norm(out.lambda1) - out.lambda2 * out.lambda2;
    out.b = 2.0 * out.lambda1.real() * out.lambda2;
    out.pauli_noise = std::abs(out.b) <= 1e-12;
    out.frame.row(0) = e1;
    out.frame.row(1) = e2;
    out.frame.row(2) = e1.cross(e2);
    return out;
}

}  // namespace ceqfi

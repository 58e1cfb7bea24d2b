#pragma once

#include <vector>

#include "ceqfi/linalg.hpp"

namespace ceqfi {

enum class ChannelFamily { General, Pauli, AmplitudeDamping };

/// A validated single-qubit channel given by Kraus operators k_0..k_r with
/// sum_i k_i^dag k_i = 1.
class KrausChannel {
public:
    /// Probabilistic Pauli mixture: k_i = sqrt(p_i) sigma_i for every p_i > 0.
    /// Accepts 2..4 probabilities indexed against sigma_0..sigma_3.
    static KrausChannel pauli(const std::vector<double>& p);

    /// k_0 = diag(1, sqrt(1-p)), k_1 = sqrt(p) |0><1| for 0 < p < 1.
    static KrausChannel amplitude_damping(double p);

    /// Arbitrary Kraus list; rejects lists whose trace-preservation deviation
    /// exceeds trace_tol.
    static KrausChannel from_ops(std::vector<CMat2> ops, double trace_tol = 1e-12);

    /// Arbitrary Kraus list without the trace-preservation gate, for
    /// diagnostics on deliberately broken lists.
    static KrausChannel unchecked(std::vector<CMat2> ops);

    int kraus_count() const { return static_cast<int>(ops_.size()); }
    const std::vector<CMat2>& ops() const { return ops_; }
    const CMat2& op(int i) const { return ops_[static_cast<std::size_t>(i)]; }

    ChannelFamily family() const { return family_; }
    const std::vector<double>& family_params() const { return params_; }
    bool canonical() const { return canonical_; }

    /// Number of linearly independent Kraus operators (Gram eigenvalues above
    /// 1e-10 count).
    int rank() const;

    /// Hilbert-Schmidt weights d_i = tr(k_i^dag k_i).
    std::vector<double> weights() const;

    /// Global unitary accumulated by canonicalization: this(rho) equals
    /// frame * original(rho) * frame^dag. Identity unless canonicalization had
    /// to reorient k_0.
    const CMat2& frame() const { return frame_; }

    /// sum_i k_i rho k_i^dag.
    CMat2 apply(const CMat2& rho) const;

    /// Exactly one noise operator beyond k_0.
    bool rank1_noise() const { return ops_.size() == 2; }

    /// Largest deviation of sum_i k_i^dag k_i from the identity.
    double trace_deviation() const;

private:
    KrausChannel() = default;

    std::vector<CMat2> ops_;
    ChannelFamily family_ = ChannelFamily::General;
    std::vector<double> params_;
    bool canonical_ = false;
    CMat2 frame_ = CMat2::Identity();

    friend KrausChannel canonicalize(const KrausChannel& c);
};

struct ValidationReport {
    double trace_deviation = 0.0;
    int rank = 0;
    bool canonical = false;
};

/// Diagnostic check: trace-preservation deviation, detected rank, and whether
/// the Kraus set is already in canonical form.
ValidationReport validate_channel(const KrausChannel& c);

/// Rewrites the Kraus set into the canonical form used by the bound
/// machinery: Hilbert-Schmidt orthogonal operators sorted by descending
/// weight, k_0 Hermitian with positive trace, and (for a single noise
/// operator) k_1 free of any identity component.
///
/// Mixing of the Kraus index preserves the channel exactly; reorienting k_0
/// applies a global unitary which is recorded in frame() and corresponds to a
/// relabeling of observable directions.
KrausChannel canonicalize(const KrausChannel& c);

/// Noise-operator data of a canonical two-operator channel, written as
/// k_1 = lambda1 sigma_1 + i lambda2 sigma_2 in the frame whose first axis is
/// the real part of the noise vector.
struct Rank1Params {
    cxd lambda1{0.0, 0.0};
    double lambda2 = 0.0;
    double a = 0.0;  // 1 - |lambda1|^2 - lambda2^2
    double b = 0.0;  // 2 Re(lambda1) lambda2
    /// Noise operator is a single Pauli rotation up to phase (b == 0).
    bool pauli_noise = false;
    /// Rows are the frame axes e1, e2, e3 in lab coordinates.
    Eigen::Matrix3d frame = Eigen::Matrix3d::Identity();
};

Rank1Params rank1_params(const KrausChannel& c);

}  // namespace ceqfi

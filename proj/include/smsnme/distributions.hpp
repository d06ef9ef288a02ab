#ifndef SMSNME_DISTRIBUTIONS_HPP
#define SMSNME_DISTRIBUTIONS_HPP

/** \file
 * Scale mixtures of skew-normal (SMSN) distributions and the supporting laws
 * used by the samplers: truncated normal, truncated gamma, inverse Gaussian and
 * normal inverse Gaussian.
 *
 * An SMSN vector is Y = mu + U^{-1/2} X with X ~ SN(0, Sigma, Delta) and U ~ H(.|nu).
 * The family tag selects H: degenerate at 1, Gamma(nu/2, nu/2), Beta(nu, 1) or the
 * two-point law {tau w.p. rho, 1 w.p. 1 - rho}. The symmetric families (Delta = 0)
 * are the scale mixtures of normals.
 */

#include <cstddef>
#include <string>
#include <string_view>

#include <Eigen/Dense>

#include "smsnme/rng.hpp"

namespace smsnme {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

enum class Family {
    Normal,
    StudentT,
    Slash,
    ContaminatedNormal,
    SkewNormal,
    SkewT,
    SkewSlash,
    SkewContaminatedNormal,
};

enum class MixingKind { Degenerate, Gamma, Beta, TwoPoint };

bool is_skewed(Family family);
MixingKind mixing_kind(Family family);
/// Model code used on the command line: fmn, fmt, fmsl, fmcn, fmsn, fmst, fmssl, fmscn.
std::string_view model_code(Family family);
Family family_from_code(std::string_view code);
/// Display name, e.g. "FMST-ME".
std::string model_label(Family family);

/// Parameters of the mixing distribution H(.|nu). Only the fields relevant to
/// the family are read: `nu` for the t and slash kinds, `rho`/`tau` for the
/// contaminated-normal kind.
struct ScaleFactor {
    double nu = 0.0;
    double rho = 0.0;
    double tau = 1.0;

    bool operator==(const ScaleFactor &) const = default;
};

void validate_scale_factor(Family family, const ScaleFactor &sf);
/// Draw U ~ H(.|nu).
double draw_scale_factor(Family family, const ScaleFactor &sf, Rng &rng);

struct OmegaLambda {
    Matrix omega;
    Vector lambda;
};

struct SigmaDelta {
    Matrix sigma;
    Vector delta;
};

/// Omega = Sigma + Delta Delta^T, lambda = Omega^{-1} Delta / (1 - Delta^T Omega^{-1} Delta)^{1/2}.
OmegaLambda omega_lambda_from(const Matrix &sigma, const Vector &delta);
/// Inverse map: delta = lambda / (1 + lambda^T Omega lambda)^{1/2}, Delta = Omega delta,
/// Sigma = Omega - Omega delta delta^T Omega.
SigmaDelta sigma_delta_from(const Matrix &omega, const Vector &lambda);

/// Scalars from which every family density is evaluated.
struct DensityTerms {
    double mahalanobis = 0.0; ///< (x - mu)^T Omega^{-1} (x - mu)
    double log_det = 0.0;     ///< log det Omega
    double skew_arg = 0.0;    ///< lambda^T (x - mu)
    bool skewed = false;      ///< false routes to the symmetric (SMN) formula
};

/// Log density of a `dim`-variate SMSN member given its scalar terms.
/// The slash kinds integrate over u in (0, 1) adaptively (relative tolerance 1e-8).
double smsn_log_density(const DensityTerms &terms, int dim, Family family, const ScaleFactor &sf);

/// One SMSN distribution. Immutable; derived quantities are cached at construction.
class SmsnParams {
public:
    SmsnParams(Vector mu, Matrix sigma, Vector delta, Family family, ScaleFactor sf = {});

    int dim() const { return static_cast<int>(mu_.size()); }
    const Vector &mu() const { return mu_; }
    const Matrix &sigma() const { return sigma_; }
    const Vector &delta() const { return delta_; }
    Family family() const { return family_; }
    const ScaleFactor &scale_factor() const { return sf_; }
    const Matrix &omega() const { return omega_; }
    const Vector &lambda() const { return lambda_; }
    /// Shape below 1e-12 in norm is evaluated on the symmetric path.
    bool skewed_path() const { return skewed_; }

    DensityTerms terms(const Vector &x) const;
    double log_pdf(const Vector &x) const;
    double pdf(const Vector &x) const;

private:
    Vector mu_;
    Matrix sigma_;
    Vector delta_;
    Family family_;
    ScaleFactor sf_;
    Matrix omega_;
    Vector lambda_;
    Eigen::LLT<Matrix> omega_llt_;
    Matrix sigma_chol_;
    double log_det_omega_ = 0.0;
    bool skewed_ = false;
};

/// n x q matrix of i.i.d. draws through U ~ H, T = |N(0, 1/U)|, N(mu + Delta T, Sigma / U).
Matrix smsn_sample(const SmsnParams &params, std::size_t n, Rng &rng);

/// Law of C Y + d: SMSN_m(C mu + d, C Sigma C^T, C Delta, nu). C must have full row rank.
SmsnParams affine_transform(const SmsnParams &params, const Matrix &c, const Vector &d);

/// N(mu, var) conditioned on exceeding `lower` (which may be -inf).
double truncated_normal_sample(double mu, double var, double lower, Rng &rng);

/// Gamma(shape, rate) restricted to (0, 1), by inverse CDF.
double truncated_gamma_unit_sample(double shape, double rate, Rng &rng);
/// Gamma(shape, rate) restricted to (lower, upper), by inverse CDF.
double truncated_gamma_sample(double shape, double rate, double lower, double upper, Rng &rng);

struct IgParams {
    double gamma;
    double delta;
};

void validate(const IgParams &params);
double ig_log_pdf(double u, const IgParams &params);
double ig_pdf(double u, const IgParams &params);
/// Transformation method with mean delta/gamma and shape delta^2.
double ig_sample(const IgParams &params, Rng &rng);

struct NigParams {
    Vector mu;
    Matrix capdelta; ///< SPD, det = 1
    Vector lambda;
    double gamma;
    double delta;
};

void validate(const NigParams &params);
/// X | U = u ~ N(mu + u capdelta lambda, u capdelta), U ~ IG(gamma, delta).
Matrix nig_sample(const NigParams &params, std::size_t n, Rng &rng);

} // namespace smsnme

#endif

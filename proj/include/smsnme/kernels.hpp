#ifndef SMSNME_KERNELS_HPP
#define SMSNME_KERNELS_HPP

/** \file
 * Row-level likelihood kernels. Each kernel has a serial reference version and
 * an OpenMP version; both write one value per row (or per draw and row) into
 * preallocated storage, so the parallel result is bit-identical to the serial
 * one and any reduction happens afterwards in a fixed order.
 */

#include <span>
#include <vector>

#include "smsnme/me_model.hpp"

namespace smsnme {

/** \brief Per-theta constants for O(p) evaluation of log pi(z | theta).
 *
 * With Psi_j = Omega + c_j b b^T (c_j = gamma2_j + Delta_j^2) the Sherman-Morrison
 * identity gives the Mahalanobis distance, log-determinant and skewness argument
 * of every component from the two row scalars e^T Omega^{-1} e and b^T Omega^{-1} e,
 * where e = z - a.
 */
class MeDensityCache {
public:
    explicit MeDensityCache(const MeTheta &theta);

    double row_log_density(std::span<const double> z) const;
    int dim() const { return dim_; }

private:
    struct Component {
        double log_weight;
        double mu;
        double delta;
        double c;
        double log_det;
        double one_plus_cs;
        double skew_scale;
        bool skewed;
    };
    int dim_;
    Family family_;
    ScaleFactor sf_;
    Vector a_;
    Vector omega_inv_;
    Vector omega_inv_b_;
    double s_;
    std::vector<Component> components_;
};

void row_log_densities_serial(const MeTheta &theta, const Dataset &data, std::span<double> out);
void row_log_densities_parallel(const MeTheta &theta, const Dataset &data, std::span<double> out);

/// L x n matrix of log pi(z_i | theta_l).
Matrix loglik_matrix_serial(std::span<const MeTheta> draws, const Dataset &data);
Matrix loglik_matrix_parallel(std::span<const MeTheta> draws, const Dataset &data);

} // namespace smsnme

#endif

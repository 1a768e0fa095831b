#pragma once

#include "tsproj/posterior.hpp"

#include <Eigen/Dense>

#include <vector>

namespace tsproj {

/// Projection of one reference draw. For iid Gaussian predictives the KL
/// minimizer is the least-squares fit to the reference mean, with the
/// residual mean square added to the reference variance.
struct DrawProjection {
    Eigen::VectorXd coefficients;
    double sigma = 0.0;
    double kl = 0.0;
};

/// Factorizes a submodel design once and projects any number of draws onto it.
class SubmodelProjector {
public:
    explicit SubmodelProjector(Eigen::MatrixXd sub_design);

    DrawProjection project(const Eigen::VectorXd& reference_mean, double reference_sigma) const;
    const Eigen::MatrixXd& design() const noexcept { return design_; }

private:
    Eigen::MatrixXd design_;
    Eigen::HouseholderQR<Eigen::MatrixXd> qr_;
};

DrawProjection project_draw(const Eigen::MatrixXd& sub_design, const Eigen::VectorXd& reference_mean,
                            double reference_sigma);

struct ProjectedSubmodel {
    int order = 0;                 // number of retained non-intercept columns
    std::vector<int> columns;      // reference columns kept (0 is the intercept)
    Eigen::MatrixXd design;        // n x (order + 1)
    Eigen::MatrixXd coefficients;  // S x (order + 1)
    Eigen::VectorXd sigma;         // S
    Eigen::VectorXd kl_per_draw;   // S

    double mean_kl() const { return kl_per_draw.size() ? kl_per_draw.mean() : 0.0; }
    Eigen::VectorXd coefficient_mean() const { return coefficients.colwise().mean().transpose(); }
};

/// Projects every reference draw onto the intercept plus the first `order`
/// lag columns of the reference design.
ProjectedSubmodel project_submodel(const LinearModelFit& reference, int order);

/// Projects onto an arbitrary subset of reference columns (must include 0).
ProjectedSubmodel project_columns(const LinearModelFit& reference, std::vector<int> columns);

/// Projects onto a design that need not be a column subset of the reference,
/// but must have the same rows.
ProjectedSubmodel project_onto_design(const LinearModelFit& reference, Eigen::MatrixXd sub_design, int order);

/// KL( N(mu_a, sigma_a^2 I) || N(mu_b, sigma_b^2 I) ).
double kl_gaussian_iid(const Eigen::VectorXd& mu_a, double sigma_a, const Eigen::VectorXd& mu_b, double sigma_b);

}  // namespace tsproj

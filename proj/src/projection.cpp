#include "tsproj/projection.hpp"

#include "tsproj/error.hpp"

#include <cmath>
#include <sstream>

namespace tsproj {

SubmodelProjector::SubmodelProjector(Eigen::MatrixXd sub_design) : design_(std::move(sub_design)) {
    if (design_.cols() == 0) throw ArgumentError("projection: submodel design has no columns");
    if (design_.rows() < design_.cols()) throw ArgumentError("projection: fewer rows than submodel columns");
    const auto bad = collinear_columns(design_);
    if (!bad.empty()) {
        std::ostringstream os;
        os << "projection: submodel design is rank deficient (column";
        for (int j : bad) os << ' ' << j;
        os << ')';
        throw RankDeficiencyError(os.str(), bad);
    }
    qr_.compute(design_);
}

DrawProjection SubmodelProjector::project(const Eigen::VectorXd& reference_mean, double reference_sigma) const {
    if (reference_mean.size() != design_.rows()) throw ArgumentError("projection: reference mean length mismatch");
    if (!(reference_sigma > 0.0)) throw ArgumentError("projection: reference sigma must be positive");

    DrawProjection out;
    out.coefficients = qr_.solve(reference_mean);
    const double n = static_cast<double>(design_.rows());
    const double mse = (reference_mean - design_ * out.coefficients).squaredNorm() / n;
    out.sigma = std::sqrt(reference_sigma * reference_sigma + mse);
    // KL of the iid predictives at the optimum reduces to n log(sigma_perp / sigma_ref).
    out.kl = 0.5 * n * std::log1p(mse / (reference_sigma * reference_sigma));
    return out;
}

DrawProjection project_draw(const Eigen::MatrixXd& sub_design, const Eigen::VectorXd& reference_mean,
                            double reference_sigma) {
    return SubmodelProjector(sub_design).project(reference_mean, reference_sigma);
}

ProjectedSubmodel project_onto_design(const LinearModelFit& reference, Eigen::MatrixXd sub_design, int order) {
    if (sub_design.rows() != reference.design.rows()) {
        throw ArgumentError("projection: submodel design must have the reference's rows");
    }
    const SubmodelProjector projector(std::move(sub_design));
    const auto& draws = reference.draws;
    const Eigen::Index S = draws.size();

    ProjectedSubmodel out;
    out.order = order;
    out.design = projector.design();
    out.coefficients.resize(S, out.design.cols());
    out.sigma.resize(S);
    out.kl_per_draw.resize(S);
    for (Eigen::Index s = 0; s < S; ++s) {
        const Eigen::VectorXd f = reference.design * draws.coefficients.row(s).transpose();
        const DrawProjection d = projector.project(f, draws.sigma(s));
        out.coefficients.row(s) = d.coefficients.transpose();
        out.sigma(s) = d.sigma;
        out.kl_per_draw(s) = d.kl;
    }
    return out;
}

ProjectedSubmodel project_columns(const LinearModelFit& reference, std::vector<int> columns) {
    if (columns.empty() || columns.front() != 0) throw ArgumentError("projection: column set must start with the intercept");
    Eigen::MatrixXd sub(reference.design.rows(), static_cast<Eigen::Index>(columns.size()));
    for (std::size_t j = 0; j < columns.size(); ++j) {
        if (columns[j] < 0 || columns[j] >= reference.design.cols()) throw ArgumentError("projection: column out of range");
        sub.col(static_cast<Eigen::Index>(j)) = reference.design.col(columns[j]);
    }
    ProjectedSubmodel out = project_onto_design(reference, std::move(sub), static_cast<int>(columns.size()) - 1);
    out.columns = std::move(columns);
    return out;
}

ProjectedSubmodel project_submodel(const LinearModelFit& reference, int order) {
    if (order < 0 || order >= reference.design.cols()) {
        std::ostringstream os;
        os << "projection: order " << order << " exceeds reference order " << reference.design.cols() - 1;
        throw ArgumentError(os.str());
    }
    std::vector<int> columns(static_cast<std::size_t>(order) + 1);
    for (int j = 0; j <= order; ++j) columns[static_cast<std::size_t>(j)] = j;
    return project_columns(reference, std::move(columns));
}

double kl_gaussian_iid(const Eigen::VectorXd& mu_a, double sigma_a, const Eigen::VectorXd& mu_b, double sigma_b) {
    if (!(sigma_a > 0.0) || !(sigma_b > 0.0)) throw ArgumentError("kl_gaussian_iid: scales must be positive");
    if (mu_a.size() != mu_b.size()) throw ArgumentError("kl_gaussian_iid: length mismatch");
    const double n = static_cast<double>(mu_a.size());
    const double ratio = sigma_a * sigma_a / (sigma_b * sigma_b);
    const double quad = (mu_a - mu_b).squaredNorm() / (2.0 * sigma_b * sigma_b);
    return n * (std::log(sigma_b / sigma_a) + 0.5 * ratio - 0.5) + quad;
}

}  // namespace tsproj

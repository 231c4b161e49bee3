#include "caviar/selection.hpp"

#include "caviar/stats.hpp"

#include <limits>

namespace caviar::selection {

namespace {

constexpr double kImprovementGuard = 1e-12;

double pearson(const Eigen::VectorXd& a, const Eigen::VectorXd& b, bool* degenerate = nullptr) {
    const Eigen::VectorXd da = a.array() - a.mean();
    const Eigen::VectorXd db = b.array() - b.mean();
    const double saa = da.squaredNorm();
    const double sbb = db.squaredNorm();
    // Relative guard so that exact-zero and round-off-zero variances agree.
    const double scale_b = b.squaredNorm();
    if (saa <= 0.0 || sbb <= 1e-24 * std::max(1.0, scale_b)) {
        if (degenerate) *degenerate = true;
        return 0.0;
    }
    if (degenerate) *degenerate = false;
    return da.dot(db) / std::sqrt(saa * sbb);
}

// Index of the largest |value|; ties go to the first. Masked entries are skipped.
std::optional<std::size_t> argmax_abs(const Series& values, const std::vector<bool>& skip) {
    std::optional<std::size_t> best;
    for (std::size_t j = 0; j < values.size(); ++j) {
        if (skip[j]) continue;
        if (!best || std::abs(values[j]) > std::abs(values[*best])) best = j;
    }
    return best;
}

}  // namespace

CorrelationResult lagged_correlation(std::span<const double> target,
                                     const Eigen::MatrixXd& predictors, std::size_t lag) {
    const auto T = target.size();
    if (static_cast<std::size_t>(predictors.rows()) != T)
        throw DomainError("target and predictor lengths differ");
    if (lag == 0 || lag >= T - 1) throw DomainError("lag must satisfy 0 < lag < T - 1");
    const auto n = static_cast<Eigen::Index>(T - lag);
    const Eigen::VectorXd y = Eigen::Map<const Eigen::VectorXd>(target.data() + lag, n);
    CorrelationResult out;
    out.correlation.resize(static_cast<std::size_t>(predictors.cols()));
    out.zero_variance.resize(static_cast<std::size_t>(predictors.cols()));
    for (Eigen::Index j = 0; j < predictors.cols(); ++j) {
        bool degenerate = false;
        const Eigen::VectorXd x = predictors.col(j).head(n);
        out.correlation[static_cast<std::size_t>(j)] = pearson(y, x, &degenerate);
        out.zero_variance[static_cast<std::size_t>(j)] = degenerate;
    }
    return out;
}

OlsResult ols(const Eigen::VectorXd& y, const Eigen::MatrixXd& regressors) {
    const auto n = y.size();
    if (regressors.rows() != n) throw DomainError("regressor rows differ from response length");
    const auto k = regressors.cols();
    if (n <= k + 1) throw SingularDesignError("not enough observations for the design");
    Eigen::MatrixXd x(n, k + 1);
    x.col(0).setOnes();
    x.rightCols(k) = regressors;

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(x.rows(), x.cols());
    qr.setThreshold(1e-10);
    qr.compute(x);
    if (qr.rank() < x.cols()) throw SingularDesignError("design matrix [1, Z] is rank deficient");

    OlsResult out;
    out.coefficients = qr.solve(y);
    out.residuals = y - x * out.coefficients;
    const double rss = out.residuals.squaredNorm();
    const double tss = (y.array() - y.mean()).matrix().squaredNorm();
    const double dof = static_cast<double>(n - k - 1);
    out.r2 = tss > 0.0 ? 1.0 - rss / tss : 0.0;
    out.adjusted_r2 = 1.0 - (1.0 - out.r2) * static_cast<double>(n - 1) / dof;

    const double sigma2 = rss / dof;
    const Eigen::MatrixXd xtx_inv = (x.transpose() * x).inverse();
    out.t_stats.resize(k + 1);
    out.p_values.resize(k + 1);
    for (Eigen::Index i = 0; i <= k; ++i) {
        const double se = std::sqrt(sigma2 * xtx_inv(i, i));
        const double b = out.coefficients(i);
        out.t_stats(i) = se > 0.0 ? b / se : (b == 0.0 ? 0.0 : std::copysign(std::numeric_limits<double>::infinity(), b));
        out.p_values(i) = stats::t_two_sided_p(out.t_stats(i), dof);
    }
    return out;
}

Series pca_weights(const Eigen::MatrixXd& x) {
    const auto k = x.cols();
    if (k < 1) throw DomainError("PCA needs at least one column");
    if (x.rows() < 2) throw DomainError("PCA needs at least two observations");
    Eigen::MatrixXd z = x.rowwise() - x.colwise().mean();
    for (Eigen::Index j = 0; j < k; ++j) {
        const double norm = z.col(j).norm();
        if (!(norm > 1e-12 * std::max(1.0, x.col(j).norm())))
            throw DomainError("PCA column " + std::to_string(j) + " has zero variance");
        z.col(j) /= norm;
    }
    if (k == 1) return {1.0};
    const Eigen::MatrixXd corr = z.transpose() * z;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(corr);
    const Eigen::VectorXd lead = eig.eigenvectors().col(k - 1);  // eigenvalues ascend
    Series w(static_cast<std::size_t>(k));
    double total = 0.0;
    for (Eigen::Index j = 0; j < k; ++j) total += w[static_cast<std::size_t>(j)] = lead(j) * lead(j);
    for (auto& v : w) v /= total;
    return w;
}

SelectionResult select_influential(const data::ReturnPanel& panel, std::size_t target, double alpha) {
    if (panel.assets() < 2) throw DomainError("selection needs at least two assets");
    if (target >= panel.assets()) throw DomainError("target index out of range");
    if (!(alpha > 0.0 && alpha < 1.0)) throw DomainError("alpha must lie in (0, 1)");
    const auto T = static_cast<Eigen::Index>(panel.periods());
    if (T < 4) throw DomainError("selection needs at least 4 periods");

    const Eigen::MatrixXd& r = panel.returns();
    std::vector<std::size_t> others;
    for (std::size_t j = 0; j < panel.assets(); ++j)
        if (j != target) others.push_back(j);

    // Response r_{i,t} for t = 1..T-1 against lagged candidates x_{j,t-1}.
    const Eigen::VectorXd y = r.col(static_cast<Eigen::Index>(target)).tail(T - 1);
    Eigen::MatrixXd lagged(T - 1, static_cast<Eigen::Index>(others.size()));
    for (std::size_t c = 0; c < others.size(); ++c)
        lagged.col(static_cast<Eigen::Index>(c)) = r.col(static_cast<Eigen::Index>(others[c])).head(T - 1);

    SelectionResult result;
    result.weights.target = target;
    result.trace.target = target;

    const Series target_series = panel.column(target);
    const auto first = lagged_correlation(target_series, r(Eigen::all, others), 1);
    const auto pick = argmax_abs(first.correlation, first.zero_variance);
    if (!pick) {
        result.trace.stop_reason = "no candidate with positive variance";
        return result;
    }

    auto design = [&](const std::vector<std::size_t>& cols) {
        Eigen::MatrixXd z(T - 1, static_cast<Eigen::Index>(cols.size()));
        for (std::size_t c = 0; c < cols.size(); ++c) z.col(static_cast<Eigen::Index>(c)) = lagged.col(static_cast<Eigen::Index>(cols[c]));
        return z;
    };

    std::vector<std::size_t> selected{*pick};  // positions within `others`
    OlsResult fit = ols(y, design(selected));
    const double p_first = fit.p_values(1);
    const bool enter = p_first < alpha;
    result.trace.steps.push_back({others[*pick], first.correlation[*pick], p_first, fit.adjusted_r2, enter});
    if (!enter) {
        result.trace.stop_reason = "first candidate not significant";
        return result;
    }

    std::vector<std::size_t> remaining;
    for (std::size_t c = 0; c < others.size(); ++c)
        if (c != *pick && !first.zero_variance[c]) remaining.push_back(c);

    double best_adj = fit.adjusted_r2;
    result.trace.stop_reason = "candidate pool exhausted";
    while (!remaining.empty()) {
        // Partial correlations: residuals of y on Z against residuals of each V column on Z.
        const Eigen::MatrixXd z = design(selected);
        Eigen::MatrixXd zc(T - 1, z.cols() + 1);
        zc.col(0).setOnes();
        zc.rightCols(z.cols()) = z;
        const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(zc);

        Series partial(remaining.size());
        std::vector<bool> skip(remaining.size());
        for (std::size_t v = 0; v < remaining.size(); ++v) {
            const Eigen::VectorXd col = lagged.col(static_cast<Eigen::Index>(remaining[v]));
            const Eigen::VectorXd e = col - zc * qr.solve(col);
            bool degenerate = false;
            partial[v] = pearson(fit.residuals, e, &degenerate);
            // A candidate spanned by Z carries no new information.
            skip[v] = degenerate || e.squaredNorm() <= 1e-20 * std::max(1.0, col.squaredNorm());
        }
        const auto best = argmax_abs(partial, skip);
        if (!best) {
            result.trace.stop_reason = "remaining candidates are spanned by the selection";
            break;
        }
        const std::size_t cand = remaining[*best];
        auto trial = selected;
        trial.push_back(cand);
        OlsResult trial_fit;
        try {
            trial_fit = ols(y, design(trial));
        } catch (const SingularDesignError&) {
            result.trace.steps.push_back({others[cand], partial[*best], 1.0, best_adj, false});
            result.trace.stop_reason = "candidate makes the design singular";
            break;
        }
        const bool improves = trial_fit.adjusted_r2 > best_adj + kImprovementGuard;
        result.trace.steps.push_back({others[cand], partial[*best],
                                      trial_fit.p_values(trial_fit.p_values.size() - 1),
                                      trial_fit.adjusted_r2, improves});
        if (!improves) {
            result.trace.stop_reason = "adjusted R2 did not improve";
            break;
        }
        selected = std::move(trial);
        fit = std::move(trial_fit);
        best_adj = fit.adjusted_r2;
        remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(*best));
    }

    for (auto c : selected) result.weights.sources.push_back(others[c]);
    result.weights.weights = pca_weights(r(Eigen::all, result.weights.sources));
    return result;
}

}  // namespace caviar::selection

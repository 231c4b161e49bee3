#include "caviar/mcs.hpp"

#include <limits>

namespace caviar::mcs {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kDegenerateVariance = 1e-14;

}  // namespace

void LossMatrix::validate() const {
    if (losses.cols() < 2) throw DomainError("MCS needs at least two models");
    if (losses.rows() < 2) throw DomainError("MCS needs at least two forecast dates");
    if (static_cast<std::size_t>(losses.cols()) != models.size())
        throw DomainError("one model label per loss column required");
    if (!losses.allFinite()) throw DomainError("loss matrix contains non-finite entries");
}

bool McsResult::survives(std::size_t model) const {
    return std::find(survivors.begin(), survivors.end(), model) != survivors.end();
}

std::vector<std::size_t> block_bootstrap_indices(std::size_t periods, std::size_t block_length, Rng& rng) {
    std::vector<std::size_t> idx;
    idx.reserve(periods);
    const std::size_t starts = periods - block_length + 1;
    while (idx.size() < periods) {
        const std::size_t s = rng.index(starts);
        for (std::size_t k = 0; k < block_length && idx.size() < periods; ++k) idx.push_back(s + k);
    }
    return idx;
}

McsResult mcs_range(const LossMatrix& input, const McsConfig& config) {
    input.validate();
    const auto P = static_cast<std::size_t>(input.losses.rows());
    const auto M = static_cast<std::size_t>(input.losses.cols());
    if (config.bootstrap_reps < 500) throw DomainError("MCS needs at least 500 bootstrap replications");
    if (config.block_length < 1 || config.block_length >= P) throw DomainError("block length must satisfy 1 <= L < P");
    if (!(config.alpha > 0.0 && config.alpha < 1.0)) throw DomainError("MCS alpha must lie in (0, 1)");

    const Eigen::MatrixXd& L = input.losses;
    const Eigen::VectorXd mean_loss = L.colwise().mean();
    const auto B = config.bootstrap_reps;
    Eigen::MatrixXd boot(static_cast<Eigen::Index>(B), static_cast<Eigen::Index>(M));
    parallel_for(B, config.threads, [&](std::size_t b) {
        Rng rng(derive_seed(config.seed, SeedStream::BootstrapRep, b));
        const auto idx = block_bootstrap_indices(P, config.block_length, rng);
        for (std::size_t m = 0; m < M; ++m) {
            double acc = 0.0;
            for (auto t : idx) acc += L(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(m));
            boot(static_cast<Eigen::Index>(b), static_cast<Eigen::Index>(m)) = acc / static_cast<double>(P);
        }
    });

    // Pairwise differential statistics are fixed across rounds; only the active set shrinks.
    Eigen::MatrixXd t_stat = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
    Eigen::MatrixXd scale = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(M), static_cast<Eigen::Index>(M));
    for (std::size_t i = 0; i < M; ++i) {
        for (std::size_t j = i + 1; j < M; ++j) {
            const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
            const double d = mean_loss(ii) - mean_loss(jj);
            const Eigen::ArrayXd centred = (boot.col(ii) - boot.col(jj)).array() - d;
            const double var = centred.square().mean();
            double t = 0.0;
            if (var >= kDegenerateVariance * (1.0 + d * d)) {
                const double sd = std::sqrt(var);
                t = d / sd;
                scale(ii, jj) = scale(jj, ii) = 1.0 / sd;
            } else if (std::abs(d) > std::sqrt(kDegenerateVariance) * (1.0 + std::abs(mean_loss(ii)))) {
                t = d > 0.0 ? kInf : -kInf;
            }
            t_stat(ii, jj) = t;
            t_stat(jj, ii) = -t;
        }
    }

    McsResult out;
    out.models = input.models;
    out.alpha = config.alpha;
    out.p_values.assign(M, 1.0);
    std::vector<std::size_t> active(M);
    for (std::size_t i = 0; i < M; ++i) active[i] = i;

    double running_max = 0.0;
    while (active.size() > 1) {
        double range = 0.0;
        for (auto i : active)
            for (auto j : active)
                if (i < j) range = std::max(range, std::abs(t_stat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))));

        std::size_t exceed = 0;
        for (std::size_t b = 0; b < B; ++b) {
            const auto bb = static_cast<Eigen::Index>(b);
            double stat = 0.0;
            for (auto i : active)
                for (auto j : active) {
                    if (i >= j) continue;
                    const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(j);
                    const double s = scale(ii, jj);
                    if (s == 0.0) continue;
                    const double centred = boot(bb, ii) - boot(bb, jj) - (mean_loss(ii) - mean_loss(jj));
                    stat = std::max(stat, std::abs(centred) * s);
                }
            if (stat >= range) ++exceed;
        }
        const double p = static_cast<double>(exceed) / static_cast<double>(B);

        std::size_t worst = active.front();
        double worst_stat = -kInf;
        for (auto i : active) {
            double sup = -kInf;
            for (auto j : active)
                if (j != i) sup = std::max(sup, t_stat(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)));
            if (sup > worst_stat) {
                worst_stat = sup;
                worst = i;
            }
        }
        running_max = std::max(running_max, p);
        out.p_values[worst] = running_max;
        out.elimination_order.push_back(worst);
        active.erase(std::find(active.begin(), active.end(), worst));
    }
    out.elimination_order.push_back(active.front());
    out.p_values[active.front()] = 1.0;
    for (std::size_t i = 0; i < M; ++i)
        if (out.p_values[i] >= config.alpha) out.survivors.push_back(i);
    return out;
}

}  // namespace caviar::mcs

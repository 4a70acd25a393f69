#include "copaint/oracle.hpp"

#include <Eigen/Cholesky>
#include <stdexcept>

#include "copaint/errors.hpp"

namespace copaint {

ConditionalGaussian condition(const GaussianWorld& world,
                              const Observation& obs) {
    if (obs.op.kind() != RevealOperator::Kind::PixelMask)
        throw std::invalid_argument("condition: pixel-mask observations only");
    if (obs.op.input_dim() != world.dim())
        throw std::invalid_argument("condition: dimension mismatch");
    if (world.dim() > 64)
        throw std::invalid_argument("condition: desk-scale oracle, dim <= 64");

    ConditionalGaussian out;
    out.revealed = obs.op.revealed_indices();
    const auto& mask = obs.op.mask();
    for (int i = 0; i < world.dim(); ++i)
        if (!mask[static_cast<std::size_t>(i)]) out.unrevealed.push_back(i);

    const int nr = static_cast<int>(out.revealed.size());
    const int nu = static_cast<int>(out.unrevealed.size());
    const Eigen::MatrixXd& S = world.cov();
    const Eigen::VectorXd& m = world.mean();

    if (nr == 0) {  // nothing observed: conditional equals the prior
        out.mean = m;
        out.cov = S;
        return out;
    }

    Eigen::MatrixXd Srr(nr, nr), Sur(nu, nr), Suu(nu, nu);
    Eigen::VectorXd mr(nr), mu(nu);
    for (int a = 0; a < nr; ++a) {
        mr[a] = m[out.revealed[static_cast<std::size_t>(a)]];
        for (int b = 0; b < nr; ++b)
            Srr(a, b) = S(out.revealed[static_cast<std::size_t>(a)],
                          out.revealed[static_cast<std::size_t>(b)]);
    }
    for (int a = 0; a < nu; ++a) {
        mu[a] = m[out.unrevealed[static_cast<std::size_t>(a)]];
        for (int b = 0; b < nr; ++b)
            Sur(a, b) = S(out.unrevealed[static_cast<std::size_t>(a)],
                          out.revealed[static_cast<std::size_t>(b)]);
        for (int b = 0; b < nu; ++b)
            Suu(a, b) = S(out.unrevealed[static_cast<std::size_t>(a)],
                          out.unrevealed[static_cast<std::size_t>(b)]);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(Srr);
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive())
        throw NumericError("condition: revealed block numerically singular");
    out.mean = mu + Sur * ldlt.solve(obs.s0 - mr);
    out.cov = Suu - Sur * ldlt.solve(Sur.transpose());
    return out;
}

GaussianLaw exact_marginal(const GaussianWorld& world,
                           const NoiseSchedule& schedule, int t) {
    double ab = schedule.alpha_bar(t);
    GaussianLaw law;
    law.mean = std::sqrt(ab) * world.mean();
    law.cov = ab * world.cov() +
              (1.0 - ab) * Eigen::MatrixXd::Identity(world.dim(), world.dim());
    return law;
}

}  // namespace copaint

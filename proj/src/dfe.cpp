#include "mct/dfe/dfe.hpp"

#include <algorithm>
#include <sstream>

#include "mct/dfe/stability.hpp"
#include "mct/text.hpp"

namespace mct::dfe {

double scalarize(std::span<const DfeVector> dfe_vectors, const ScalarizationWeights& weights) {
    if (dfe_vectors.size() != weights.size()) {
        throw ArgumentError("scalarize: " + std::to_string(dfe_vectors.size()) + " DFE vectors but " +
                            std::to_string(weights.size()) + " weights");
    }
    double total = 0.0;
    for (std::size_t i = 0; i < dfe_vectors.size(); ++i) total += weights[i] * dfe_vectors[i].mean();
    return total;
}

ScalarizationWeights epsilon_weights(std::size_t m, double epsilon) {
    if (m == 0) throw ArgumentError("epsilon_weights: need at least one dataset");
    if (m == 1) {
        if (epsilon != 0.0) throw ArgumentError("epsilon_weights: a single dataset admits only epsilon = 0");
        return ScalarizationWeights(VectorXd::Ones(1));
    }
    const double md = static_cast<double>(m);
    const double rest = 1.0 / md - epsilon / (md - 1.0);
    // The head absorbs rounding so the weights add up to one.
    const double head = 1.0 - (md - 1.0) * rest;
    VectorXd betas = VectorXd::Constant(static_cast<Eigen::Index>(m), rest);
    betas(0) = head;
    for (Eigen::Index i = 0; i < betas.size(); ++i) {
        if (betas(i) < 0.0) {
            throw ArgumentError("epsilon = " + format_double(epsilon) + " makes weight " +
                                std::to_string(i + 1) + " negative (" + format_double(betas(i)) +
                                "); all weights must be positive for properly efficient solutions");
        }
    }
    return ScalarizationWeights(std::move(betas));
}

void write_stability_csv(std::ostream& out, std::span<const StabilityReport> reports) {
    out << "trial,lhs,rhs,holds\n";
    for (std::size_t i = 0; i < reports.size(); ++i) {
        out << i << ',' << format_double(reports[i].lhs) << ',' << format_double(reports[i].rhs) << ','
            << (reports[i].holds ? "true" : "false") << '\n';
    }
}

std::string stability_summary(std::span<const StabilityReport> reports) {
    const auto violations = std::count_if(reports.begin(), reports.end(),
                                          [](const StabilityReport& r) { return !r.holds; });
    double worst_ratio = 0.0;
    bool estimated = false;
    for (const auto& r : reports) {
        if (r.rhs > 0.0) worst_ratio = std::max(worst_ratio, r.lhs / r.rhs);
        estimated = estimated || r.lipschitz_estimated;
    }
    std::ostringstream s;
    s << reports.size() << " trials, " << violations << " violations, max lhs/rhs = "
      << format_fixed(worst_ratio, 6);
    if (estimated) s << " (Lipschitz constant estimated, not certified)";
    return s.str();
}

}  // namespace mct::dfe

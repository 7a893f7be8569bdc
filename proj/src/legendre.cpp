#include "mfseg/legendre.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "mfseg/holder.hpp"
#include "mfseg/parallel.hpp"

namespace mfseg {

std::vector<double> default_q_grid() {
    std::vector<double> q;
    for (int i = -40; i <= 40; ++i) q.push_back(i * 0.25);
    return q;
}

PartitionTable partition_function(const MeasureField& field, const Region& region,
                                  const std::vector<double>& q_grid,
                                  const std::vector<int>& widths, int threads) {
    if (region.size < 1) throw std::invalid_argument("empty region");
    if (q_grid.empty()) throw std::invalid_argument("empty q grid");
    for (double q : q_grid)
        if (!std::isfinite(q)) throw std::invalid_argument("non-finite q");

    const std::vector<BoxGrid> grids = field.box_grid_ladder(region, widths);

    // Normalize per width by the grid's own mass so that chi(1) == 1
    // regardless of how much of the field lies outside the region. A
    // constant factor never moves the fitted slopes.
    std::vector<std::vector<double>> log_mass(grids.size());
    std::vector<double> region_mass(grids.size(), 0.0);
    for (size_t wi = 0; wi < grids.size(); ++wi) {
        double total = 0.0;
        for (double m : grids[wi].masses) total += m;
        if (!(total > 0.0)) throw std::invalid_argument("region has no mass");
        region_mass[wi] = total;
        log_mass[wi].reserve(grids[wi].masses.size());
        for (double m : grids[wi].masses)
            if (m > 0.0) log_mass[wi].push_back(std::log(m / total));
    }

    PartitionTable table;
    table.q_grid = q_grid;
    table.widths = widths;
    table.chi.assign(q_grid.size(), std::vector<double>(widths.size(), 0.0));

    const size_t pairs = q_grid.size() * widths.size();
    parallel_for(pairs, threads, [&](size_t p) {
        const size_t qi = p / widths.size();
        const size_t wi = p % widths.size();
        const double q = q_grid[qi];
        double sum = 0.0;  // boxes in a fixed order; reproducible
        for (double lm : log_mass[wi]) sum += std::exp(q * lm);
        table.chi[qi][wi] = sum;
    });
    return table;
}

TauCurve tau(const PartitionTable& table) {
    TauCurve tc;
    tc.q_grid = table.q_grid;
    tc.tau.assign(table.q_grid.size(), 0.0);
    tc.fit_r2.assign(table.q_grid.size(), 0.0);
    tc.defined.assign(table.q_grid.size(), 0);
    for (size_t qi = 0; qi < table.q_grid.size(); ++qi) {
        std::vector<double> xs, ys;
        for (size_t wi = 0; wi < table.widths.size(); ++wi) {
            const double chi = table.chi[qi][wi];
            if (!(chi > 0.0) || !std::isfinite(chi)) continue;
            xs.push_back(-std::log(static_cast<double>(table.widths[wi])));
            ys.push_back(std::log(chi));
        }
        if (xs.size() < 3) continue;
        const OlsFit fit = ols_fit(xs, ys);
        tc.tau[qi] = fit.slope;
        tc.fit_r2[qi] = fit.r2;
        tc.defined[qi] = 1;
    }
    return tc;
}

SpectrumCurve legendre_spectrum(const TauCurve& tc) {
    // need at least 3 consecutive defined q points for one interior
    // central difference
    SpectrumCurve curve;
    curve.kind = SpectrumCurve::Kind::Legendre;
    bool warned = false;
    double prev_alpha = std::numeric_limits<double>::infinity();
    size_t emitted = 0;
    for (size_t i = 1; i + 1 < tc.q_grid.size(); ++i) {
        if (!tc.defined[i] || !tc.defined[i - 1] || !tc.defined[i + 1]) continue;
        const double dq = tc.q_grid[i + 1] - tc.q_grid[i - 1];
        if (!(dq > 0.0)) throw std::invalid_argument("q grid must be increasing");
        const double alpha = -(tc.tau[i + 1] - tc.tau[i - 1]) / dq;
        const double f = tc.q_grid[i] * alpha + tc.tau[i];
        // alpha(q) should not increase along q; flag estimation noise
        if (alpha > prev_alpha + 1e-9) warned = true;
        prev_alpha = alpha;
        curve.points.push_back({alpha, f, 0});
        ++emitted;
    }
    if (emitted == 0) throw std::invalid_argument("too few defined tau points for a spectrum");
    if (warned) curve.warning = "alpha(q) not monotone; spectrum may be unreliable at extreme q";
    sort_and_merge(curve);
    return curve;
}

void save_tau_csv(const TauCurve& tc, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot open " + path + " for writing");
    out << "q,tau,r2\n";
    char line[96];
    auto snap = [](double v) { return std::abs(v) < 0.5e-8 ? 0.0 : v; };
    for (size_t i = 0; i < tc.q_grid.size(); ++i) {
        if (!tc.defined[i]) continue;
        std::snprintf(line, sizeof line, "%.8f,%.8f,%.8f\n", snap(tc.q_grid[i]),
                      snap(tc.tau[i]), tc.fit_r2[i]);
        out << line;
    }
    if (!out.good()) throw IoError("write failure on " + path);
}

}  // namespace mfseg

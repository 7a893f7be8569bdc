#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mfseg/measure.hpp"
#include "mfseg/spectrum.hpp"

namespace mfseg {

/// chi_q(r) over a q grid and a mesh ladder. Box masses are normalized
/// by the mass of the analyzed region, so chi at q = 1 is 1 at every
/// width. Empty boxes are skipped for all q.
struct PartitionTable {
    std::vector<double> q_grid;
    std::vector<int> widths;
    std::vector<std::vector<double>> chi;  // chi[qi][wi]

    double at(size_t qi, size_t wi) const { return chi[qi][wi]; }
};

/// Mass exponents tau(q): slope of ln chi_q(r) against -ln r. A q with
/// fewer than 3 finite positive chi values is marked undefined.
struct TauCurve {
    std::vector<double> q_grid;
    std::vector<double> tau;
    std::vector<double> fit_r2;
    std::vector<uint8_t> defined;
};

std::vector<double> default_q_grid();  // -10..10 step 0.25

PartitionTable partition_function(const MeasureField& field, const Region& region,
                                  const std::vector<double>& q_grid,
                                  const std::vector<int>& widths, int threads = 1);

TauCurve tau(const PartitionTable& table);

/// Legendre transform of tau: alpha(q) = -dtau/dq by central differences
/// on the q grid (endpoints dropped), f = q*alpha + tau. Emitted sorted
/// by alpha; a non-monotone alpha(q) sets the curve's warning field.
SpectrumCurve legendre_spectrum(const TauCurve& tc);

/// CSV "q,tau,r2", fixed 8 decimals, undefined q rows omitted.
void save_tau_csv(const TauCurve& tc, const std::string& path);

}  // namespace mfseg

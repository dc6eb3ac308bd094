#ifndef STCCPM_CPM_CORE_HPP
#define STCCPM_CPM_CORE_HPP

#include <functional>
#include <span>
#include <vector>

#include "cpm_params.hpp"
#include "waveform.hpp"

namespace stccpm {

// Phase smoothing function q(t) in cycles. q(t) = 0 for t <= 0 and
// q(t) = 1/2 for t >= gamma*T, continuous and nondecreasing in between.
//   REC: q(t) = t / (2*gamma*T)
//   RC:  q(t) = (t/(gamma*T) - sin(2*pi*t/(gamma*T))/(2*pi)) / 2
double phase_pulse_q(PulseShape pulse, int gamma, double t, double T);

// Optional additive phase term (in cycles) as a function of time;
// used for the per-antenna correction factors.
using PhaseFn = std::function<double(double)>;

// Instantaneous CPM phase in cycles at time t for a stream of symbols
// (symbol i, 0-based, starts its pulse at t = i*T). Symbols with index
// < 0 do not exist (zero history convention).
double cpm_phase_cycles(const CpmParams& params, std::span<const double> symbols, double t);

// Sampled CPM waveform:
//   s(t) = amplitude_scale * exp(j*2*pi*[theta0 + h*sum_i d_i q(t-i*T) + extra(t)])
// with n_symbols*sps samples at t_k = k*T/sps.
Waveform synthesize_cpm(const CpmParams& params, std::span<const double> symbols,
                        double theta0_cycles, const PhaseFn& extra_phase,
                        double amplitude_scale, int antenna_id = 0);

// The finite set of accumulated phase states: closure of {0} under
// increments (h/2)*d mod 1, d in the data alphabet. Exact rationals.
std::vector<Rational> phase_state_set(const CpmParams& params);

// Validates that every symbol lies in the given alphabet (as doubles).
void check_symbols_in_alphabet(std::span<const double> symbols,
                               std::span<const double> alphabet);

} // namespace stccpm

#endif

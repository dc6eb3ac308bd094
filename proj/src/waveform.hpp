#ifndef STCCPM_WAVEFORM_HPP
#define STCCPM_WAVEFORM_HPP

#include <complex>
#include <vector>

namespace stccpm {

using cplx = std::complex<double>;

// Uniformly sampled complex baseband signal for one antenna.
struct Waveform {
    std::vector<cplx> samples;
    double sample_rate = 1.0; // samples per second
    double t0 = 0.0;          // time of samples[0]
    int antenna_id = 0;

    std::size_t size() const { return samples.size(); }
    double time_of(std::size_t k) const { return t0 + static_cast<double>(k) / sample_rate; }
};

} // namespace stccpm

#endif

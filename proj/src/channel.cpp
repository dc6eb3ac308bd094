#include "channel.hpp"

#include <cmath>

namespace stccpm {

FadingMode fading_mode_from_name(const std::string& s) {
    if (s == "iid" || s == "per_antenna") return FadingMode::PerAntenna;
    if (s == "common") return FadingMode::Common;
    throw ConfigError("unknown fading mode: " + s);
}

const char* fading_mode_name(FadingMode m) {
    return m == FadingMode::PerAntenna ? "iid" : "common";
}

FadingMatrix sample_fading(int Lt, int Lr, Rng& rng) {
    if (Lt < 1 || Lr < 1) throw InputError("antenna counts must be >= 1");
    FadingMatrix A;
    A.Lr = Lr;
    A.Lt = Lt;
    A.a.resize(static_cast<std::size_t>(Lr) * Lt);
    for (auto& v : A.a) v = rng.cn01();
    return A;
}

FadingMatrix sample_fading_common(int Lt, int Lr, Rng& rng) {
    if (Lt < 1 || Lr < 1) throw InputError("antenna counts must be >= 1");
    FadingMatrix A;
    A.Lr = Lr;
    A.Lt = Lt;
    A.a.resize(static_cast<std::size_t>(Lr) * Lt);
    for (int n = 0; n < Lr; ++n) {
        const cplx g = rng.cn01();
        for (int m = 0; m < Lt; ++m) A.at(n, m) = g;
    }
    return A;
}

ChannelRealization make_block_fading(int Lt, int Lr, int n_blocks, double N0, FadingMode mode,
                                     Rng& rng) {
    ChannelRealization ch;
    ch.block_len = 1;
    ch.N0 = N0;
    ch.per_block.reserve(static_cast<std::size_t>(n_blocks));
    for (int l = 0; l < n_blocks; ++l)
        ch.per_block.push_back(mode == FadingMode::PerAntenna ? sample_fading(Lt, Lr, rng)
                                                              : sample_fading_common(Lt, Lr, rng));
    return ch;
}

namespace {

void check_tx(const std::vector<Waveform>& tx) {
    if (tx.empty()) throw InputError("no transmit waveforms");
    for (const auto& w : tx)
        if (w.size() != tx[0].size() || w.sample_rate != tx[0].sample_rate)
            throw InputError("mismatched transmit waveform lengths or rates");
}

} // namespace

std::vector<Waveform> transmit_static(const std::vector<Waveform>& tx, const FadingMatrix& A,
                                      double N0, Rng& rng) {
    check_tx(tx);
    if (A.Lt != static_cast<int>(tx.size())) throw InputError("fading matrix Lt mismatch");
    const std::size_t len = tx[0].size();
    const double dt = 1.0 / tx[0].sample_rate;
    const double sigma = (N0 > 0.0) ? std::sqrt(N0 / dt) : 0.0; // E|w|^2 = N0/dt

    std::vector<Waveform> rx(static_cast<std::size_t>(A.Lr));
    for (int n = 0; n < A.Lr; ++n) {
        rx[n].sample_rate = tx[0].sample_rate;
        rx[n].t0 = tx[0].t0;
        rx[n].antenna_id = n;
        rx[n].samples.assign(len, cplx{0.0, 0.0});
        for (int m = 0; m < A.Lt; ++m) {
            const cplx g = A.at(n, m);
            const auto& s = tx[m].samples;
            for (std::size_t k = 0; k < len; ++k) rx[n].samples[k] += g * s[k];
        }
        if (sigma > 0.0)
            for (std::size_t k = 0; k < len; ++k) rx[n].samples[k] += sigma * rng.cn01();
    }
    return rx;
}

std::vector<Waveform> transmit(const std::vector<Waveform>& tx, const ChannelRealization& ch,
                               int Lt, double T, Rng& rng) {
    check_tx(tx);
    if (ch.per_block.empty()) throw InputError("channel realization has no fading blocks");
    const std::size_t len = tx[0].size();
    const double fs = tx[0].sample_rate;
    const double dt = 1.0 / fs;
    const std::size_t samples_per_block = static_cast<std::size_t>(std::lround(Lt * T * fs));
    if (samples_per_block == 0) throw InputError("degenerate block length");
    const int Lr = ch.per_block[0].Lr;
    const double sigma = (ch.N0 > 0.0) ? std::sqrt(ch.N0 / dt) : 0.0;

    std::vector<Waveform> rx(static_cast<std::size_t>(Lr));
    for (int n = 0; n < Lr; ++n) {
        rx[n].sample_rate = fs;
        rx[n].t0 = tx[0].t0;
        rx[n].antenna_id = n;
        rx[n].samples.assign(len, cplx{0.0, 0.0});
    }
    for (std::size_t k = 0; k < len; ++k) {
        const int l = static_cast<int>(k / samples_per_block);
        const FadingMatrix& A = ch.block(l);
        for (int n = 0; n < Lr; ++n) {
            cplx acc{0.0, 0.0};
            for (int m = 0; m < static_cast<int>(tx.size()); ++m)
                acc += A.at(n, m) * tx[m].samples[k];
            rx[n].samples[k] = acc;
        }
    }
    if (sigma > 0.0)
        for (int n = 0; n < Lr; ++n)
            for (std::size_t k = 0; k < len; ++k) rx[n].samples[k] += sigma * rng.cn01();
    return rx;
}

double snr_to_n0(double EbN0_dB, const CpmParams& params) {
    params.validate();
    const double Eb = params.Es / std::log2(static_cast<double>(params.M));
    return Eb * std::pow(10.0, -EbN0_dB / 10.0);
}

} // namespace stccpm

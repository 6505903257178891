#pragma once

#include <fftw3.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstring>
#include <mutex>
#include <numbers>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "astkit/error.hpp"

namespace astkit {

inline constexpr double kDefaultFrameShift = 0.010;

// Row-major frames x dims matrix with the frame shift it was computed at.
class FeatureMatrix {
  public:
    FeatureMatrix() = default;
    FeatureMatrix(std::size_t rows, std::size_t cols, double frame_shift = kDefaultFrameShift)
        : rows_(rows), cols_(cols), frame_shift_(frame_shift), data_(rows * cols, 0.0) {}

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    double frame_shift() const noexcept { return frame_shift_; }

    double &operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::span<const double> data() const noexcept { return data_; }

    bool operator==(const FeatureMatrix &) const = default;

  private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    double frame_shift_ = kDefaultFrameShift;
    std::vector<double> data_;
};

// ---------------------------------------------------------------------------
// Framing

struct FrameOptions {
    double window = 0.025;
    double shift = kDefaultFrameShift;
    double preemphasis = 0.97;
};

inline std::size_t window_samples(double rate, const FrameOptions &opts = {}) {
    return static_cast<std::size_t>(std::lround(opts.window * rate));
}
inline std::size_t shift_samples(double rate, const FrameOptions &opts = {}) {
    return static_cast<std::size_t>(std::lround(opts.shift * rate));
}

// 1 + floor((N - W) / S) for N >= W, else 0.
inline std::size_t num_frames(std::size_t n_samples, double rate, const FrameOptions &opts = {}) {
    const std::size_t w = window_samples(rate, opts), s = shift_samples(rate, opts);
    return n_samples < w ? 0 : 1 + (n_samples - w) / s;
}

// Cuts `samples` into overlapping frames, each pre-emphasized and then
// Hamming-windowed. One row per frame.
inline FeatureMatrix frame_signal(std::span<const double> samples, double rate, const FrameOptions &opts = {}) {
    if (!(rate > 0.0)) throw Error("sample rate must be positive");
    if (opts.window < opts.shift) throw Error("window shorter than frame shift");
    const std::size_t w = window_samples(rate, opts), s = shift_samples(rate, opts);
    if (w == 0 || s == 0) throw Error("window or shift rounds to zero samples");

    std::vector<double> hamming(w);
    for (std::size_t i = 0; i < w; ++i)
        hamming[i] = w == 1 ? 1.0 : 0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                           static_cast<double>(w - 1));

    const std::size_t n = num_frames(samples.size(), rate, opts);
    FeatureMatrix frames(n, w, static_cast<double>(s) / rate);
    for (std::size_t f = 0; f < n; ++f) {
        auto out = frames.row(f);
        const double *x = samples.data() + f * s;
        for (std::size_t i = w; i-- > 1;) out[i] = x[i] - opts.preemphasis * x[i - 1];
        out[0] = x[0] - opts.preemphasis * x[0];
        for (std::size_t i = 0; i < w; ++i) out[i] *= hamming[i];
    }
    return frames;
}

// ---------------------------------------------------------------------------
// Mel filter bank

inline double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }
inline double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

inline std::size_t next_power_of_two(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

struct MelOptions {
    std::size_t n_mels = 80;
    double low_hz = 20.0;
    double high_hz = 0.0; // 0 means Nyquist
    double log_floor = 1e-10;
};

// Triangular filters equally spaced on the mel scale between low_hz and
// high_hz. Weights are computed in the mel domain over the FFT bin centres.
class MelFilterBank {
  public:
    MelFilterBank(std::size_t fft_size, double rate, const MelOptions &opts = {}) {
        const double high = opts.high_hz > 0.0 ? opts.high_hz : rate / 2.0;
        if (!(high > opts.low_hz)) throw Error("mel filter bank has empty frequency range");
        if (opts.n_mels == 0) throw Error("need at least one mel filter");
        const double mel_low = hz_to_mel(opts.low_hz), mel_high = hz_to_mel(high);
        const double step = (mel_high - mel_low) / static_cast<double>(opts.n_mels + 1);
        const std::size_t n_bins = fft_size / 2 + 1;
        filters_.resize(opts.n_mels);
        for (std::size_t m = 0; m < opts.n_mels; ++m) {
            const double left = mel_low + step * static_cast<double>(m);
            const double centre = left + step, right = centre + step;
            centres_hz_.push_back(mel_to_hz(centre));
            auto &f = filters_[m];
            for (std::size_t k = 0; k < n_bins; ++k) {
                const double mel = hz_to_mel(static_cast<double>(k) * rate / static_cast<double>(fft_size));
                double weight = 0.0;
                if (mel > left && mel <= centre)
                    weight = (mel - left) / (centre - left);
                else if (mel > centre && mel < right)
                    weight = (right - mel) / (right - centre);
                if (weight > 0.0) {
                    if (f.weights.empty()) f.first_bin = k;
                    f.weights.resize(k - f.first_bin + 1, 0.0);
                    f.weights.back() = weight;
                }
            }
        }
    }

    std::size_t size() const noexcept { return filters_.size(); }
    const std::vector<double> &centres_hz() const noexcept { return centres_hz_; }

    double energy(std::size_t m, std::span<const double> power) const {
        const auto &f = filters_[m];
        double e = 0.0;
        for (std::size_t i = 0; i < f.weights.size(); ++i) e += f.weights[i] * power[f.first_bin + i];
        return e;
    }

  private:
    struct Filter {
        std::size_t first_bin = 0;
        std::vector<double> weights;
    };
    std::vector<Filter> filters_;
    std::vector<double> centres_hz_;
};

namespace detail {

// FFTW planning is not thread-safe; executing a finished plan is.
inline std::mutex &fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

class RealFft {
  public:
    explicit RealFft(std::size_t n) : n_(n) {
        in_ = static_cast<double *>(fftw_malloc(sizeof(double) * n));
        out_ = static_cast<fftw_complex *>(fftw_malloc(sizeof(fftw_complex) * (n / 2 + 1)));
        if (!in_ || !out_) {
            release();
            throw std::bad_alloc();
        }
        std::lock_guard lock(fftw_planner_mutex());
        plan_ = fftw_plan_dft_r2c_1d(static_cast<int>(n), in_, out_, FFTW_ESTIMATE);
    }
    RealFft(const RealFft &) = delete;
    RealFft &operator=(const RealFft &) = delete;
    ~RealFft() { release(); }

    // |X_k|^2 for k in [0, n/2] of the zero-padded input.
    void power_spectrum(std::span<const double> frame, std::span<double> power) {
        std::fill(in_, in_ + n_, 0.0);
        std::copy(frame.begin(), frame.end(), in_);
        fftw_execute(plan_);
        for (std::size_t k = 0; k <= n_ / 2; ++k) power[k] = out_[k][0] * out_[k][0] + out_[k][1] * out_[k][1];
    }

  private:
    void release() {
        if (plan_) {
            std::lock_guard lock(fftw_planner_mutex());
            fftw_destroy_plan(plan_);
        }
        if (in_) fftw_free(in_);
        if (out_) fftw_free(out_);
        plan_ = nullptr;
        in_ = nullptr;
        out_ = nullptr;
    }

    std::size_t n_;
    double *in_ = nullptr;
    fftw_complex *out_ = nullptr;
    fftw_plan plan_ = nullptr;
};

} // namespace detail

// Log mel filter-bank energies of already windowed frames.
inline FeatureMatrix logmel(const FeatureMatrix &frames, double rate, const MelOptions &opts = {}) {
    if (frames.cols() == 0) throw Error("frames have zero length");
    const std::size_t fft_size = next_power_of_two(frames.cols());
    const MelFilterBank bank(fft_size, rate, opts);
    FeatureMatrix out(frames.rows(), opts.n_mels, frames.frame_shift());
    if (frames.rows() == 0) return out;
    detail::RealFft fft(fft_size);
    std::vector<double> power(fft_size / 2 + 1);
    const double floor = std::log(opts.log_floor);
    for (std::size_t f = 0; f < frames.rows(); ++f) {
        fft.power_spectrum(frames.row(f), power);
        for (std::size_t m = 0; m < opts.n_mels; ++m) {
            const double e = bank.energy(m, power);
            out(f, m) = e > opts.log_floor ? std::log(e) : floor;
        }
    }
    return out;
}

// Framing plus log mel in one call.
inline FeatureMatrix compute_fbank(std::span<const double> samples, double rate, const FrameOptions &frame_opts = {},
                                   const MelOptions &mel_opts = {}) {
    return logmel(frame_signal(samples, rate, frame_opts), rate, mel_opts);
}

// ---------------------------------------------------------------------------
// CMVN

inline constexpr double kCmvnEpsilon = 1e-8;

// Sufficient statistics (per-dimension sum and sum of squares, frame count).
// Accumulation is associative, so shards can be merged in any order.
struct CmvnStats {
    std::vector<double> sum;
    std::vector<double> sum_sq;
    std::size_t frame_count = 0;

    std::size_t dims() const noexcept { return sum.size(); }

    void accumulate(const FeatureMatrix &m) {
        if (frame_count == 0 && sum.empty()) {
            sum.assign(m.cols(), 0.0);
            sum_sq.assign(m.cols(), 0.0);
        }
        if (m.cols() != dims())
            throw Error("CMVN dimension mismatch: " + std::to_string(m.cols()) + " vs " + std::to_string(dims()));
        for (std::size_t r = 0; r < m.rows(); ++r)
            for (std::size_t c = 0; c < m.cols(); ++c) {
                sum[c] += m(r, c);
                sum_sq[c] += m(r, c) * m(r, c);
            }
        frame_count += m.rows();
    }

    CmvnStats &operator+=(const CmvnStats &o) {
        if (o.sum.empty()) return *this;
        if (sum.empty()) return *this = o;
        if (o.dims() != dims()) throw Error("CMVN dimension mismatch");
        for (std::size_t c = 0; c < dims(); ++c) {
            sum[c] += o.sum[c];
            sum_sq[c] += o.sum_sq[c];
        }
        frame_count += o.frame_count;
        return *this;
    }

    std::vector<double> mean() const {
        std::vector<double> m(dims());
        for (std::size_t c = 0; c < dims(); ++c) m[c] = sum[c] / static_cast<double>(frame_count);
        return m;
    }

    std::vector<double> variance() const {
        std::vector<double> v(dims());
        for (std::size_t c = 0; c < dims(); ++c) {
            const double mu = sum[c] / static_cast<double>(frame_count);
            v[c] = std::max(0.0, sum_sq[c] / static_cast<double>(frame_count) - mu * mu);
        }
        return v;
    }
};

inline CmvnStats compute_cmvn(std::span<const FeatureMatrix> matrices) {
    CmvnStats st;
    for (const auto &m : matrices) st.accumulate(m);
    if (st.frame_count < 2) throw Error("CMVN needs at least two frames");
    return st;
}

// (x - mean) / sqrt(variance + 1e-8), per dimension.
inline FeatureMatrix apply_cmvn(const CmvnStats &stats, const FeatureMatrix &m) {
    if (m.cols() != stats.dims())
        throw Error("CMVN dimension mismatch: " + std::to_string(m.cols()) + " vs " +
                    std::to_string(stats.dims()));
    const auto mean = stats.mean();
    const auto var = stats.variance();
    std::vector<double> scale(var.size());
    for (std::size_t c = 0; c < var.size(); ++c) scale[c] = 1.0 / std::sqrt(var[c] + kCmvnEpsilon);
    FeatureMatrix out(m.rows(), m.cols(), m.frame_shift());
    for (std::size_t r = 0; r < m.rows(); ++r)
        for (std::size_t c = 0; c < m.cols(); ++c) out(r, c) = (m(r, c) - mean[c]) * scale[c];
    return out;
}

// "frame_count N" then "sum ..." and "sum_sq ..." lines.
inline std::string write_cmvn_stats(const CmvnStats &st) {
    auto row = [](const char *key, const std::vector<double> &v) {
        std::string line = key;
        char buf[64];
        for (double x : v) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
            line += ' ';
            line.append(buf, p);
        }
        return line + '\n';
    };
    return "frame_count " + std::to_string(st.frame_count) + '\n' + row("sum", st.sum) + row("sum_sq", st.sum_sq);
}

inline CmvnStats read_cmvn_stats(std::string_view text) {
    CmvnStats st;
    bool have_count = false;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) end = text.size();
        const std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;
        std::vector<std::string_view> f;
        for (std::size_t i = 0; i < line.size();) {
            while (i < line.size() && line[i] == ' ') ++i;
            const std::size_t b = i;
            while (i < line.size() && line[i] != ' ') ++i;
            if (i > b) f.push_back(line.substr(b, i - b));
        }
        if (f.empty()) continue;
        auto number = [&](std::string_view s) {
            double v = 0.0;
            auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
            if (ec != std::errc() || p != s.data() + s.size())
                throw ParseError(line_no, "bad number '" + std::string(s) + "' in CMVN stats");
            return v;
        };
        if (f[0] == "frame_count" && f.size() == 2) {
            st.frame_count = static_cast<std::size_t>(number(f[1]));
            have_count = true;
        } else if (f[0] == "sum" || f[0] == "sum_sq") {
            auto &dst = f[0] == "sum" ? st.sum : st.sum_sq;
            for (std::size_t i = 1; i < f.size(); ++i) dst.push_back(number(f[i]));
        } else {
            throw ParseError(line_no, "unexpected key in CMVN stats");
        }
    }
    if (!have_count || st.sum.size() != st.sum_sq.size() || st.frame_count < 2)
        throw Error("incomplete CMVN stats");
    return st;
}

// ---------------------------------------------------------------------------
// Augmentation and stream concatenation

// Resamples by linear interpolation so the output plays `factor` times
// faster: length round(N / factor), sample i taken at input position
// i * factor. Factor 1.0 returns the input unchanged.
inline std::vector<double> speed_perturb(std::span<const double> samples, double factor) {
    if (!(factor > 0.0)) throw Error("speed factor must be positive");
    if (factor == 1.0) return {samples.begin(), samples.end()};
    const auto n_out = static_cast<std::size_t>(std::llround(static_cast<double>(samples.size()) / factor));
    std::vector<double> out(n_out);
    if (samples.empty()) return out;
    const std::size_t last = samples.size() - 1;
    for (std::size_t i = 0; i < n_out; ++i) {
        const double t = static_cast<double>(i) * factor;
        const auto k = static_cast<std::size_t>(t);
        if (k >= last) {
            out[i] = samples[last];
            continue;
        }
        const double frac = t - static_cast<double>(k);
        out[i] = samples[k] * (1.0 - frac) + samples[k + 1] * frac;
    }
    return out;
}

// Column-wise concatenation, base columns first (e.g. 80 fbank + 3 pitch).
inline FeatureMatrix concat_aux(const FeatureMatrix &base, const FeatureMatrix &aux) {
    if (aux.cols() == 0 && (aux.rows() == 0 || aux.rows() == base.rows())) return base;
    if (base.rows() != aux.rows())
        throw Error("frame count mismatch: base has " + std::to_string(base.rows()) + " frames, auxiliary has " +
                    std::to_string(aux.rows()));
    if (std::abs(base.frame_shift() - aux.frame_shift()) > 1e-9)
        throw Error("frame shift mismatch between base and auxiliary features");
    FeatureMatrix out(base.rows(), base.cols() + aux.cols(), base.frame_shift());
    for (std::size_t r = 0; r < base.rows(); ++r) {
        auto dst = out.row(r);
        std::copy(base.row(r).begin(), base.row(r).end(), dst.begin());
        std::copy(aux.row(r).begin(), aux.row(r).end(), dst.begin() + static_cast<std::ptrdiff_t>(base.cols()));
    }
    return out;
}

// ---------------------------------------------------------------------------
// Feature files

// "FEAT", uint32 rows, uint32 cols, then rows*cols float32, all little-endian.
inline std::string write_feature_file(const FeatureMatrix &m) {
    std::string out = "FEAT";
    auto put_u32 = [&](std::uint32_t v) {
        for (int b = 0; b < 4; ++b) out.push_back(static_cast<char>((v >> (8 * b)) & 0xFF));
    };
    put_u32(static_cast<std::uint32_t>(m.rows()));
    put_u32(static_cast<std::uint32_t>(m.cols()));
    for (double x : m.data()) {
        const auto f = static_cast<float>(x);
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        put_u32(bits);
    }
    return out;
}

inline FeatureMatrix read_feature_file(std::string_view bytes, double frame_shift = kDefaultFrameShift) {
    if (bytes.size() < 12 || bytes.substr(0, 4) != "FEAT") throw Error("not a FEAT feature file");
    auto get_u32 = [&](std::size_t off) {
        std::uint32_t v = 0;
        for (int b = 0; b < 4; ++b) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[off + b])) << (8 * b);
        return v;
    };
    const std::size_t rows = get_u32(4), cols = get_u32(8);
    if (bytes.size() != 12 + 4 * rows * cols) throw Error("FEAT file size does not match its header");
    FeatureMatrix m(rows, cols, frame_shift);
    for (std::size_t i = 0; i < rows * cols; ++i) {
        const std::uint32_t bits = get_u32(12 + 4 * i);
        float f;
        std::memcpy(&f, &bits, sizeof f);
        m(i / cols, i % cols) = f;
    }
    return m;
}

// One comma-separated row per frame, values rounded to float32.
inline std::string write_feature_csv(const FeatureMatrix &m) {
    std::string out;
    char buf[64];
    for (std::size_t r = 0; r < m.rows(); ++r) {
        for (std::size_t c = 0; c < m.cols(); ++c) {
            auto [p, ec] = std::to_chars(buf, buf + sizeof buf, static_cast<float>(m(r, c)));
            if (c) out += ',';
            out.append(buf, p);
        }
        out += '\n';
    }
    return out;
}

} // namespace astkit

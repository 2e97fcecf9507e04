#include "cvdsim/rng.hpp"

#include <cmath>
#include <numeric>

#include "cvdsim/errors.hpp"

namespace cvdsim {

namespace {

constexpr std::uint64_t fnv1a64(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t& x) {
    x += 0x9e3779b97f4a7c15ull;
    std::uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
}

}  // namespace

void check_probability_vector(std::span<const double> probs) {
    if (probs.empty()) {
        throw InvalidParameterError("probability vector is empty");
    }
    double sum = 0.0;
    for (double p : probs) {
        if (!(p >= 0.0)) {
            throw InvalidParameterError("probability entry " + std::to_string(p) +
                                        " is negative or NaN");
        }
        sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9) {
        throw InvalidParameterError("probabilities sum to " + std::to_string(sum) +
                                    ", expected 1 within 1e-9");
    }
}

RngStream::RngStream(std::uint64_t master_seed, std::string_view stage_tag)
    : master_seed_(master_seed), stage_tag_(stage_tag) {
    if (stage_tag.empty()) {
        throw InvalidParameterError("stage_tag must be non-empty");
    }
    std::uint64_t x = master_seed ^ fnv1a64(stage_tag);
    for (auto& word : state_) {
        word = splitmix64(x);
    }
}

std::uint64_t RngStream::next_u64() {
    // xoshiro256++
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
}

double RngStream::next_uniform() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double RngStream::next_uniform_open() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
}

std::uint64_t RngStream::next_below(std::uint64_t bound) {
    if (bound == 0) {
        throw InvalidParameterError("next_below bound must be positive");
    }
    // Lemire's multiply-shift rejection; unbiased.
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
        const std::uint64_t threshold = -bound % bound;
        while (lo < threshold) {
            x = next_u64();
            m = static_cast<__uint128_t>(x) * bound;
            lo = static_cast<std::uint64_t>(m);
        }
    }
    return static_cast<std::uint64_t>(m >> 64);
}

double RngStream::next_normal(double mean, double sd) {
    if (sd == 0.0) {
        next_u64();  // keep the stream position independent of sd
        return mean;
    }
    return mean + sd * normal_quantile(next_uniform_open());
}

std::vector<double> RngStream::normal(double mean, double sd, std::size_t n) {
    if (!(sd >= 0.0)) {
        throw InvalidParameterError("normal sd must be >= 0, got " + std::to_string(sd));
    }
    std::vector<double> out(n);
    for (auto& v : out) {
        v = next_normal(mean, sd);
    }
    return out;
}

std::size_t RngStream::next_categorical(std::span<const double> probs) {
    const double u = next_uniform();
    double cum = 0.0;
    for (std::size_t k = 0; k + 1 < probs.size(); ++k) {
        cum += probs[k];
        if (u < cum) {
            return k;
        }
    }
    return probs.size() - 1;
}

std::vector<std::size_t> RngStream::categorical(std::span<const double> probs, std::size_t n) {
    check_probability_vector(probs);
    std::vector<std::size_t> out(n);
    for (auto& v : out) {
        v = next_categorical(probs);
    }
    return out;
}

std::vector<std::uint8_t> RngStream::bernoulli(std::span<const double> p) {
    for (double pi : p) {
        if (!(pi >= 0.0 && pi <= 1.0)) {
            throw InvalidParameterError("bernoulli p " + std::to_string(pi) +
                                        " outside [0, 1]");
        }
    }
    std::vector<std::uint8_t> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) {
        out[i] = next_uniform() < p[i] ? 1 : 0;
    }
    return out;
}

std::vector<std::size_t> RngStream::permutation(std::size_t n) {
    std::vector<std::size_t> out(n);
    std::iota(out.begin(), out.end(), std::size_t{0});
    for (std::size_t i = n; i > 1; --i) {
        const std::size_t j = static_cast<std::size_t>(next_below(i));
        std::swap(out[i - 1], out[j]);
    }
    return out;
}

double normal_quantile(double p) {
    if (!(p > 0.0 && p < 1.0)) {
        throw InvalidParameterError("normal_quantile requires p in (0, 1)");
    }
    // Wichura (1988), algorithm AS241, PPND16.
    const double q = p - 0.5;
    if (std::abs(q) <= 0.425) {
        const double r = 0.180625 - q * q;
        return q *
               (((((((2.5090809287301226727e3 * r + 3.3430575583588128105e4) * r +
                     6.7265770927008700853e4) * r + 4.5921953931549871457e4) * r +
                   1.3731693765509461125e4) * r + 1.9715909503065514427e3) * r +
                 1.3314166789178437745e2) * r + 3.3871328727963666080e0) /
               (((((((5.2264952788528545610e3 * r + 2.8729085735721942674e4) * r +
                     3.9307895800092710610e4) * r + 2.1213794301586595867e4) * r +
                   5.3941960214247511077e3) * r + 6.8718700749205790830e2) * r +
                 4.2313330701600911252e1) * r + 1.0);
    }
    double r = q < 0.0 ? p : 1.0 - p;
    r = std::sqrt(-std::log(r));
    double val;
    if (r <= 5.0) {
        r -= 1.6;
        val = (((((((7.74545014278341407640e-4 * r + 2.27238449892691845833e-2) * r +
                    2.41780725177450611770e-1) * r + 1.27045825245236838258e0) * r +
                  3.64784832476320460504e0) * r + 5.76949722146069140550e0) * r +
                4.63033784615654529590e0) * r + 1.42343711074968357734e0) /
              (((((((1.05075007164441684324e-9 * r + 5.47593808499534494600e-4) * r +
                    1.51986665636164571966e-2) * r + 1.48103976427480074590e-1) * r +
                  6.89767334985100004550e-1) * r + 1.67638483018380384940e0) * r +
                2.05319162663775882187e0) * r + 1.0);
    } else {
        r -= 5.0;
        val = (((((((2.01033439929228813265e-7 * r + 2.71155556874348757815e-5) * r +
                    1.24266094738807843860e-3) * r + 2.65321895265761230930e-2) * r +
                  2.96560571828504891230e-1) * r + 1.78482653991729133580e0) * r +
                5.46378491116411436990e0) * r + 6.65790464350110377720e0) /
              (((((((2.04426310338993978564e-15 * r + 1.42151175831644588870e-7) * r +
                    1.84631831751005468180e-5) * r + 7.86869131145613259100e-4) * r +
                  1.48753612908506148525e-2) * r + 1.36929880922735805310e-1) * r +
                5.99832206555887937690e-1) * r + 1.0);
    }
    return q < 0.0 ? -val : val;
}

}  // namespace cvdsim

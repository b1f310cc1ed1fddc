#include "nrpp/rng.hpp"

#include "nrpp/errors.hpp"

#include <cmath>

namespace nrpp {

std::string_view to_string(ErrorKind kind) noexcept {
    switch (kind) {
    case ErrorKind::domain: return "domain error";
    case ErrorKind::capability: return "capability error";
    case ErrorKind::singularity: return "singularity error";
    case ErrorKind::configuration: return "configuration error";
    case ErrorKind::estimation: return "estimation error";
    case ErrorKind::precondition: return "precondition error";
    case ErrorKind::numerical: return "numerical error";
    case ErrorKind::degenerate: return "degenerate error";
    }
    return "error";
}

Error::Error(ErrorKind kind, const std::string& message)
    : std::runtime_error(std::string(to_string(kind)) + ": " + message), kind_(kind) {}

void fail(ErrorKind kind, const std::string& message) { throw Error(kind, message); }

namespace {

constexpr std::uint32_t kMul0 = 0xD2511F53u;
constexpr std::uint32_t kMul1 = 0xCD9E8D57u;
constexpr std::uint32_t kWeyl0 = 0x9E3779B9u;
constexpr std::uint32_t kWeyl1 = 0xBB67AE85u;

inline void mulhilo(std::uint32_t a, std::uint32_t b, std::uint32_t& hi, std::uint32_t& lo) noexcept {
    const std::uint64_t product = static_cast<std::uint64_t>(a) * b;
    hi = static_cast<std::uint32_t>(product >> 32);
    lo = static_cast<std::uint32_t>(product);
}

} // namespace

std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> ctr, std::array<std::uint32_t, 2> key) noexcept {
    for (int round = 0; round < 10; ++round) {
        std::uint32_t hi0, lo0, hi1, lo1;
        mulhilo(kMul0, ctr[0], hi0, lo0);
        mulhilo(kMul1, ctr[2], hi1, lo1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kWeyl0;
        key[1] += kWeyl1;
    }
    return ctr;
}

CounterEngine::CounterEngine(RngStream stream) noexcept : stream_(stream) {}

void CounterEngine::refill() noexcept {
    const std::array<std::uint32_t, 4> counter{
        static_cast<std::uint32_t>(block_), static_cast<std::uint32_t>(block_ >> 32),
        static_cast<std::uint32_t>(stream_.stream_index), static_cast<std::uint32_t>(stream_.stream_index >> 32)};
    const std::array<std::uint32_t, 2> key{static_cast<std::uint32_t>(stream_.master_seed),
                                           static_cast<std::uint32_t>(stream_.master_seed >> 32)};
    buffer_ = philox4x32_10(counter, key);
    ++block_;
    used_ = 0;
}

CounterEngine::result_type CounterEngine::operator()() noexcept {
    if (used_ == 4) {
        refill();
    }
    return buffer_[used_++];
}

double CounterEngine::uniform() noexcept {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    const std::uint64_t bits = ((hi << 32) | lo) >> 11;
    return static_cast<double>(bits) * 0x1.0p-53;
}

double CounterEngine::uniform_open() noexcept {
    const std::uint64_t hi = (*this)();
    const std::uint64_t lo = (*this)();
    const std::uint64_t bits = ((hi << 32) | lo) >> 12;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-52;
}

double CounterEngine::exponential(double rate) noexcept { return -std::log(uniform_open()) / rate; }

double CounterEngine::normal() { return normal_(*this); }

} // namespace nrpp

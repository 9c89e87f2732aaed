#pragma once

#include <array>
#include <cstdint>
#include <memory>
#include <mutex>
#include <random>

#include "ilpsim/core/bytes.hpp"

namespace ilp {

using Digest = std::array<std::uint8_t, 32>;

Digest sha256(ByteView data);
Digest hmac_sha256(ByteView key, ByteView data);

/// Source of random bytes. Simulations use a seeded generator so that tokens,
/// secrets and keys are reproducible; live processes use the OS generator.
class RandomSource {
public:
    virtual ~RandomSource() = default;
    virtual void fill(std::span<std::uint8_t> out) = 0;
    /// Uniform in [0, 1).
    virtual double uniform() = 0;

    template <std::size_t N>
    std::array<std::uint8_t, N> bytes()
    {
        std::array<std::uint8_t, N> a{};
        fill(a);
        return a;
    }
    std::uint32_t next_u32()
    {
        auto b = bytes<4>();
        return std::uint32_t{b[0]} << 24 | std::uint32_t{b[1]} << 16 | std::uint32_t{b[2]} << 8 | b[3];
    }
};

class SeededRandom final : public RandomSource {
public:
    explicit SeededRandom(std::uint64_t seed) : gen_(seed) {}
    void fill(std::span<std::uint8_t> out) override;
    double uniform() override;

private:
    std::mutex mu_;
    std::mt19937_64 gen_;
};

class SystemRandom final : public RandomSource {
public:
    void fill(std::span<std::uint8_t> out) override;
    double uniform() override;
};

using PublicKey = std::array<std::uint8_t, 32>;
using Signature = std::array<std::uint8_t, 64>;

bool verify_signature(const PublicKey& key, ByteView message, const Signature& sig);

/// Ed25519 signing key.
class SigningKey {
public:
    static SigningKey from_seed(const std::array<std::uint8_t, 32>& seed);
    static SigningKey generate(RandomSource& rng) { return from_seed(rng.bytes<32>()); }

    const PublicKey& public_key() const { return public_; }
    const std::array<std::uint8_t, 32>& seed() const { return seed_; }
    Signature sign(ByteView message) const;

private:
    std::array<std::uint8_t, 32> seed_{};
    PublicKey public_{};
};

}  // namespace ilp

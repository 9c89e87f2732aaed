#include "ilpsim/core/crypto.hpp"

#include <openssl/evp.h>
#include <openssl/hmac.h>
#include <openssl/rand.h>
#include <openssl/sha.h>

#include <stdexcept>

namespace ilp {

namespace {
struct PkeyDeleter {
    void operator()(EVP_PKEY* p) const { EVP_PKEY_free(p); }
};
struct MdCtxDeleter {
    void operator()(EVP_MD_CTX* p) const { EVP_MD_CTX_free(p); }
};
using PkeyPtr = std::unique_ptr<EVP_PKEY, PkeyDeleter>;
using MdCtxPtr = std::unique_ptr<EVP_MD_CTX, MdCtxDeleter>;
}  // namespace

Digest sha256(ByteView data)
{
    Digest out{};
    SHA256(data.data(), data.size(), out.data());
    return out;
}

Digest hmac_sha256(ByteView key, ByteView data)
{
    Digest out{};
    unsigned int len = 0;
    HMAC(EVP_sha256(), key.data(), static_cast<int>(key.size()), data.data(), data.size(), out.data(),
         &len);
    return out;
}

void SeededRandom::fill(std::span<std::uint8_t> out)
{
    std::lock_guard lock(mu_);
    std::size_t i = 0;
    while (i < out.size()) {
        auto v = gen_();
        for (int k = 0; k < 8 && i < out.size(); ++k, ++i) out[i] = static_cast<std::uint8_t>(v >> (8 * k));
    }
}

double SeededRandom::uniform()
{
    std::lock_guard lock(mu_);
    return std::uniform_real_distribution<double>(0.0, 1.0)(gen_);
}

void SystemRandom::fill(std::span<std::uint8_t> out)
{
    if (RAND_bytes(out.data(), static_cast<int>(out.size())) != 1)
        throw std::runtime_error("RAND_bytes failed");
}

double SystemRandom::uniform()
{
    auto b = bytes<8>();
    std::uint64_t v = 0;
    for (auto x : b) v = v << 8 | x;
    return static_cast<double>(v >> 11) * 0x1.0p-53;
}

SigningKey SigningKey::from_seed(const std::array<std::uint8_t, 32>& seed)
{
    PkeyPtr pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed.data(), seed.size()));
    if (!pkey) throw std::runtime_error("cannot create Ed25519 key");
    SigningKey k;
    k.seed_ = seed;
    std::size_t len = k.public_.size();
    if (EVP_PKEY_get_raw_public_key(pkey.get(), k.public_.data(), &len) != 1 || len != 32)
        throw std::runtime_error("cannot derive Ed25519 public key");
    return k;
}

Signature SigningKey::sign(ByteView message) const
{
    PkeyPtr pkey(EVP_PKEY_new_raw_private_key(EVP_PKEY_ED25519, nullptr, seed_.data(), seed_.size()));
    MdCtxPtr ctx(EVP_MD_CTX_new());
    Signature sig{};
    std::size_t len = sig.size();
    if (!pkey || !ctx || EVP_DigestSignInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1 ||
        EVP_DigestSign(ctx.get(), sig.data(), &len, message.data(), message.size()) != 1)
        throw std::runtime_error("Ed25519 signing failed");
    return sig;
}

bool verify_signature(const PublicKey& key, ByteView message, const Signature& sig)
{
    PkeyPtr pkey(EVP_PKEY_new_raw_public_key(EVP_PKEY_ED25519, nullptr, key.data(), key.size()));
    MdCtxPtr ctx(EVP_MD_CTX_new());
    if (!pkey || !ctx || EVP_DigestVerifyInit(ctx.get(), nullptr, nullptr, nullptr, pkey.get()) != 1)
        return false;
    return EVP_DigestVerify(ctx.get(), sig.data(), sig.size(), message.data(), message.size()) == 1;
}

}  // namespace ilp

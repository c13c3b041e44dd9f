#include "covpack/rng.hpp"

#include <stdexcept>

namespace covpack {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

RngStream RngStream::derive(std::uint64_t master, std::string_view label,
                            std::initializer_list<std::uint64_t> coords) {
  std::uint64_t s = splitmix64(master ^ fnv1a64(label.data(), label.size()));
  for (std::uint64_t c : coords) s = splitmix64(s ^ c);
  return RngStream(s);
}

std::uint64_t RngStream::below(std::uint64_t n) {
  if (n == 0) throw std::domain_error("below(0)");
  if ((n & (n - 1)) == 0) return next_u64() & (n - 1);
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

BigInt RngStream::below_big(const BigInt& n) {
  if (sgn(n) <= 0) throw std::domain_error("below_big: bound must be positive");
  if (n.fits_ulong_p()) return BigInt(below(n.get_ui()));
  const std::size_t bits = mpz_sizeinbase(n.get_mpz_t(), 2);
  const std::size_t words = (bits + 63) / 64;
  BigInt v;
  while (true) {
    v = 0;
    for (std::size_t w = 0; w < words; ++w) {
      mpz_mul_2exp(v.get_mpz_t(), v.get_mpz_t(), 64);
      v += BigInt(next_u64());
    }
    mpz_fdiv_r_2exp(v.get_mpz_t(), v.get_mpz_t(), bits);  // keep low `bits`
    if (v < n) return v;
  }
}

}  // namespace covpack

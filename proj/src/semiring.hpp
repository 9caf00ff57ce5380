#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace faqnet {

// Semiring elements are stored uniformly as 64-bit words. The min-plus
// semiring uses UINT64_MAX as +infinity (its additive zero).
using Value = std::uint64_t;

enum class SemiringId { Boolean, Counting, F2, MinPlus };

inline constexpr Value kMinPlusInf = ~Value{0};

struct Semiring {
  SemiringId id = SemiringId::Boolean;
  Value zero = 0;
  Value one = 1;
  int encode_bits = 1;  // serialized width of one element

  Value add(Value a, Value b) const;
  Value mul(Value a, Value b) const;
  bool is_zero(Value v) const { return v == zero; }

  std::string name() const;
  std::string format(Value v) const;
  Value parse(const std::string& text) const;

  static const Semiring& boolean();
  static const Semiring& counting();
  static const Semiring& f2();
  static const Semiring& min_plus();
  static const Semiring& by_name(const std::string& name);
};

// Counting-semiring arithmetic saturates instead of wrapping; the simulator
// surfaces this count in trace summaries.
std::uint64_t saturation_events();
void reset_saturation_events();

}  // namespace faqnet

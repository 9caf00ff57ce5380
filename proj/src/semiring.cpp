#include "semiring.hpp"

#include <atomic>
#include <limits>

namespace faqnet {

namespace {
std::atomic<std::uint64_t> g_saturations{0};

Value sat_add(Value a, Value b) {
  Value r = a + b;
  if (r < a) {
    g_saturations.fetch_add(1, std::memory_order_relaxed);
    return std::numeric_limits<Value>::max();
  }
  return r;
}

Value sat_mul(Value a, Value b) {
  if (a == 0 || b == 0) return 0;
  if (a > std::numeric_limits<Value>::max() / b) {
    g_saturations.fetch_add(1, std::memory_order_relaxed);
    return std::numeric_limits<Value>::max();
  }
  return a * b;
}
}  // namespace

std::uint64_t saturation_events() { return g_saturations.load(); }
void reset_saturation_events() { g_saturations.store(0); }

Value Semiring::add(Value a, Value b) const {
  switch (id) {
    case SemiringId::Boolean: return a | b;
    case SemiringId::Counting: return sat_add(a, b);
    case SemiringId::F2: return a ^ b;
    case SemiringId::MinPlus: return a < b ? a : b;
  }
  throw std::logic_error("bad semiring id");
}

Value Semiring::mul(Value a, Value b) const {
  switch (id) {
    case SemiringId::Boolean: return a & b;
    case SemiringId::Counting: return sat_mul(a, b);
    case SemiringId::F2: return a & b;
    case SemiringId::MinPlus:
      if (a == kMinPlusInf || b == kMinPlusInf) return kMinPlusInf;
      return sat_add(a, b);
  }
  throw std::logic_error("bad semiring id");
}

std::string Semiring::name() const {
  switch (id) {
    case SemiringId::Boolean: return "boolean";
    case SemiringId::Counting: return "counting";
    case SemiringId::F2: return "f2";
    case SemiringId::MinPlus: return "minplus";
  }
  return "?";
}

std::string Semiring::format(Value v) const {
  if (id == SemiringId::MinPlus && v == kMinPlusInf) return "inf";
  return std::to_string(v);
}

Value Semiring::parse(const std::string& text) const {
  if (id == SemiringId::MinPlus && text == "inf") return kMinPlusInf;
  Value v = std::stoull(text);
  if ((id == SemiringId::Boolean || id == SemiringId::F2) && v > 1)
    throw std::invalid_argument("element out of range for " + name() + ": " + text);
  return v;
}

const Semiring& Semiring::boolean() {
  static const Semiring s{SemiringId::Boolean, 0, 1, 1};
  return s;
}
const Semiring& Semiring::counting() {
  static const Semiring s{SemiringId::Counting, 0, 1, 64};
  return s;
}
const Semiring& Semiring::f2() {
  static const Semiring s{SemiringId::F2, 0, 1, 1};
  return s;
}
const Semiring& Semiring::min_plus() {
  static const Semiring s{SemiringId::MinPlus, kMinPlusInf, 0, 64};
  return s;
}

const Semiring& Semiring::by_name(const std::string& name) {
  if (name == "boolean") return boolean();
  if (name == "counting") return counting();
  if (name == "f2") return f2();
  if (name == "minplus") return min_plus();
  throw std::invalid_argument("unknown semiring: " + name);
}

}  // namespace faqnet

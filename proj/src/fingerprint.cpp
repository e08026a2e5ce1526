#include "tvlab/fingerprint.hpp"

#include <cstdio>
#include <sstream>

namespace tvlab {

std::uint64_t fnv1a(std::string_view bytes) {
  std::uint64_t hash = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    hash ^= c;
    hash *= 0x100000001b3ULL;
  }
  return hash;
}

std::string hex_digest(std::uint64_t value) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(value));
  return buf;
}

std::string fingerprint(const DiscreteGenerator& genr) {
  const PhysicalParams& p = genr.params;
  std::ostringstream os;
  os.precision(17);
  os << p.rho1 << ',' << p.rho2 << ',' << p.rho3 << ',' << p.k << ',' << p.b << ',' << p.delta
     << ',' << p.gamma << ',' << p.sigma << ',' << p.l << '|' << static_cast<int>(genr.kernel.form)
     << ',' << genr.kernel.g0 << ',' << genr.kernel.a << ',' << genr.kernel.k1 << '|'
     << to_string(genr.bc) << ',' << to_string(genr.variant) << '|' << genr.xgrid.n << ','
     << genr.sgrid.m << ',' << genr.sgrid.s_max;
  return hex_digest(fnv1a(os.str()));
}

}  // namespace tvlab

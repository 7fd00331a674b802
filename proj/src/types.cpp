#include "fairalloc/types.hpp"

#include <cmath>
#include <stdexcept>
#include <unordered_set>

namespace fairalloc {

int GroupDomain::index_of(const std::string& label) const {
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] == label) return static_cast<int>(i);
  }
  return -1;
}

void GroupDomain::validate() const {
  if (labels.size() < 2) throw std::invalid_argument("group domain needs at least 2 labels");
  std::unordered_set<std::string> seen(labels.begin(), labels.end());
  if (seen.size() != labels.size()) throw std::invalid_argument("group labels must be unique");
}

void Unit::validate(std::size_t group_count) const {
  if (group < 0 || static_cast<std::size_t>(group) >= group_count)
    throw std::invalid_argument("unit '" + id + "': group index out of range");
  if (prec_mask.size() != features.size())
    throw std::invalid_argument("unit '" + id + "': prec_mask length != feature length");
  for (double v : features) {
    if (!std::isfinite(v)) throw std::invalid_argument("unit '" + id + "': non-finite feature");
  }
}

std::size_t pattern_rank(const NeighborPattern& p) {
  std::size_t r = 0;
  for (std::uint8_t b : p.bits) r = (r << 1) | (b ? 1u : 0u);
  return r;
}

NeighborPattern pattern_from_rank(std::size_t rank, std::size_t len) {
  NeighborPattern p;
  p.bits.resize(len);
  for (std::size_t s = 0; s < len; ++s) {
    p.bits[s] = static_cast<std::uint8_t>((rank >> (len - 1 - s)) & 1u);
  }
  return p;
}

void SEMParamsByGroup::validate() const {
  const std::size_t n = alpha.size();
  if (beta.size() != n || gamma.size() != n || theta.size() != n)
    throw std::invalid_argument("SEM parameter arrays must share one length");
  auto finite = [](const std::vector<double>& v) {
    for (double x : v)
      if (!std::isfinite(x)) return false;
    return true;
  };
  if (!finite(alpha) || !finite(beta) || !finite(gamma) || !finite(theta))
    throw std::invalid_argument("SEM parameters must be finite");
}

}  // namespace fairalloc

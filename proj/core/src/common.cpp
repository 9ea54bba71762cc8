#include "sonarsnoop/common.hpp"

#include <cmath>

namespace sonarsnoop {

std::string_view to_string(Mic mic) {
  return mic == Mic::Bottom ? "bottom" : "top";
}

Mic parse_mic(std::string_view text) {
  if (text == "bottom") return Mic::Bottom;
  if (text == "top") return Mic::Top;
  throw ConfigError("unknown microphone '" + std::string(text) + "'");
}

double distance(Point a, Point b) { return std::hypot(a.x - b.x, a.y - b.y); }

Point lerp(Point a, Point b, double t) {
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t};
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

}  // namespace sonarsnoop

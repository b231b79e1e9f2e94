#pragma once
// Random query-text generator for parser property tests.

#include <random>
#include <sstream>
#include <string>
#include <vector>

namespace querygen {

inline double uniform01(std::mt19937_64& rng) {
  return (rng() >> 11) * (1.0 / 9007199254740992.0);
}

inline std::string ident(std::mt19937_64& rng) {
  static const char* names[] = {"n", "m", "doc", "item", "entity_x", "N0"};
  return names[rng() % 6];
}

inline std::string random_query(std::mt19937_64& rng) {
  std::ostringstream os;
  const bool with_match = rng() % 2;
  if (with_match) {
    os << "MATCH (" << ident(rng);
    if (rng() % 2) os << ":Label" << rng() % 4;
    if (rng() % 3 == 0) {
      os << " {p" << rng() % 3 << ": " << rng() % 100;
      if (rng() % 2) os << ", q: 'str" << rng() % 9 << "'";
      os << "}";
    }
    os << ") ";
    if (rng() % 3 == 0) {
      os << "WHERE " << ident(rng) << ".x > " << rng() % 50 << " ";
      if (rng() % 2) os << "AND " << ident(rng) << ".y != 'abc' ";
    }
  }
  static const char* modalities[] = {"text", "image", "audio", "video", "lidar"};
  os << "VECTOR_SEARCH(" << modalities[rng() % 5] << ", ";
  switch (rng() % 3) {
    case 0:
      os << "$p" << rng() % 4;
      break;
    case 1: {
      os << "[";
      const int d = 1 + int(rng() % 4);
      for (int i = 0; i < d; ++i) {
        if (i) os << ", ";
        os << (uniform01(rng) * 2.0 - 1.0);
      }
      os << "]";
      break;
    }
    default:
      os << "node(" << rng() % 1000 << ")";
  }
  os << ", k=" << 1 + rng() % 200;
  if (rng() % 2) os << ", ef=" << 16 + rng() % 500;
  os << ")";
  if (rng() % 2) {
    os << " TRAVERSE hops=" << rng() % 4;
    if (rng() % 2) {
      os << " types=(T" << rng() % 3;
      if (rng() % 2) os << ", S" << rng() % 3;
      os << ")";
    }
    switch (rng() % 3) {
      case 0: os << " dir=out"; break;
      case 1: os << " dir=in"; break;
      default: os << " dir=both"; break;
    }
  }
  if (rng() % 2) {
    if (rng() % 5 == 0) {
      os << " SIMILARITY_WEIGHT auto";
    } else {
      os << " SIMILARITY_WEIGHT v=" << uniform01(rng) * 3.0
         << " g=" << 0.01 + uniform01(rng) * 3.0;
    }
  }
  if (rng() % 4 == 0) os << " BUDGET " << 1 + rng() % 500;
  os << " RETURN TOP " << 1 + rng() % 50;
  return os.str();
}

}  // namespace querygen

#pragma once

// Internal machinery shared by the certificate modules. Not installed.

#include <map>
#include <memory>
#include <optional>

#include "opfam/adapted_pairs.hpp"

namespace opfam::detail {

struct EdgeModuli {
  double projection = 0.0;
  double restriction = 0.0;
};

/// Lazily built P_[-c, c](A_y), A_y P_[-c, c](A_y) and edge moduli for one
/// level c. Single-threaded.
class LevelModuli {
 public:
  LevelModuli(const FamilySample& sample, double level);

  const Matrix& projection(std::size_t i);
  const Matrix& compression(std::size_t i);
  EdgeModuli edge(std::size_t left);

 private:
  const FamilySample& sample_;
  double level_;
  std::map<std::size_t, Matrix> projections_;
  std::map<std::size_t, Matrix> compressions_;
  std::map<std::size_t, EdgeModuli> edges_;
};

/// LevelModuli per level for one sample.
class ModuliCache {
 public:
  LevelModuli& at(const FamilySample& sample, double level);

 private:
  std::map<double, std::unique_ptr<LevelModuli>> levels_;
};

/// Checks one grid point against the level: margin, rank equal to
/// `expected_rank`, and the caps on the edge to `neighbor` when set.
std::optional<Violation> check_point(const FamilySample& sample, std::size_t i, double level,
                                     int expected_rank, std::size_t neighbor,
                                     const CertifyOptions& options, LevelModuli* moduli);

CertifyResult certify(const FamilySample& sample, GridRange range, double level,
                      const CertifyOptions& options, LevelModuli* moduli);

GridRange grow(const FamilySample& sample, std::size_t x_index, double level, GridRange bounds,
               const CertifyOptions& options, LevelModuli* moduli);

/// find_adapted_pair without the b > 0 restriction (b = 0 means 0+).
AdaptedPairCertificate find(const FamilySample& sample, std::size_t x_index, double b,
                            const FindOptions& options, LevelModuli* moduli, ModuliCache* cache);

}  // namespace opfam::detail

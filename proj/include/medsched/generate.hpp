#ifndef MEDSCHED_GENERATE_HPP
#define MEDSCHED_GENERATE_HPP

// Seeded synthetic instances. All randomness comes from SplitMix64 with
// rejection-sampled ranges, so output is identical on every platform.

#include <array>
#include <cstdint>
#include <stdexcept>

#include "medsched/cts.hpp"
#include "medsched/ors.hpp"
#include "medsched/poac.hpp"

namespace medsched {

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next();
  /// Uniform integer in [lo, hi].
  int uniform(int lo, int hi);
  /// True with probability num/den.
  bool chance(int num, int den);

 private:
  std::uint64_t state_;
};

class GeneratorError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Tightness is patients per therapy resource.
struct CtsGenParams {
  std::uint64_t seed = 1;
  int patients = 20;
  int slots = 26;
  double tightness = 1.0;
  std::array<int, 3> staff{0, 0, 0};  // 0 = derived from patients and slots
  int bed_percent = 40;
  int scalp_percent = 10;
  int isolation_percent = 5;
  int drug_percent = 20;
  int max_therapy = 0;  // slots; 0 = slots / 3
  int room_size = 4;
};

/// Tightness is total surgery minutes over total shift minutes.
struct OrsGenParams {
  std::uint64_t seed = 1;
  int registrations = 20;
  int horizon = 5;
  int specialties = 3;
  double tightness = 1.0;
  int scu_percent = 20;
  int units = 1;
  int beds = 0;  // 0 = one bed per SCU registration (never binding)
  int p1_percent = 15;
  int p2_percent = 45;
  int min_duration = 30;
  int max_duration = 240;
};

/// Tightness is patient-area visits over D * total area capacity.
struct PoacGenParams {
  std::uint64_t seed = 1;
  int patients = 10;
  int days = 5;
  int areas = 3;
  int exams_per_area = 2;
  int max_exams = 3;
  double tightness = 0.5;
  int doctors = -1;  // -1 = one per area
};

inline constexpr double kTightnessTolerance = 0.10;

CtsInstance generate_cts(const CtsGenParams& p);
OrsInstance generate_ors(const OrsGenParams& p);
PoacInstance generate_poac(const PoacGenParams& p);

/// Realised tightness of an instance, by the definitions above.
double cts_tightness(const CtsInstance& inst);
double ors_tightness(const OrsInstance& inst);
double poac_tightness(const PoacInstance& inst);

}  // namespace medsched

#endif  // MEDSCHED_GENERATE_HPP

#include "medsched/generate.hpp"

#include <algorithm>
#include <cmath>
#include <set>

namespace medsched {

std::uint64_t SplitMix64::next() {
  std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

int SplitMix64::uniform(int lo, int hi) {
  if (hi <= lo) return lo;
  std::uint64_t span = static_cast<std::uint64_t>(static_cast<std::int64_t>(hi) - lo) + 1;
  std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return lo + static_cast<int>(x % span);
}

bool SplitMix64::chance(int num, int den) { return uniform(0, den - 1) < num; }

namespace {

void check_ratio(double got, double want) {
  if (std::abs(got - want) > kTightnessTolerance * want)
    throw GeneratorError("requested tightness " + std::to_string(want) + " cannot be met (closest is " +
                         std::to_string(got) + ")");
}

void check_percent(int v, const char* name) {
  if (v < 0 || v > 100) throw GeneratorError(std::string(name) + " must be within 0..100");
}

}  // namespace

double cts_tightness(const CtsInstance& inst) {
  if (inst.resources.empty()) return 0;
  return static_cast<double>(inst.patients.size()) / static_cast<double>(inst.resources.size());
}

double ors_tightness(const OrsInstance& inst) {
  double dur = 0, len = 0;
  for (const auto& r : inst.registrations) dur += r.duration;
  for (const auto& s : inst.shifts) len += s.length;
  return len > 0 ? dur / len : 0;
}

double poac_tightness(const PoacInstance& inst) {
  double visits = 0, cap = 0;
  for (const auto& p : inst.patients) visits += static_cast<double>(poac_areas_of(inst, p).size());
  for (const auto& a : inst.areas) cap += a.capacity;
  return cap > 0 ? visits / (cap * inst.days) : 0;
}

CtsInstance generate_cts(const CtsGenParams& p) {
  if (p.slots < 4) throw GeneratorError("slots must be at least 4 (one per phase)");
  if (p.patients < 0) throw GeneratorError("patients must not be negative");
  if (!(p.tightness > 0)) throw GeneratorError("tightness must be positive");
  if (p.room_size < 1) throw GeneratorError("room size must be at least 1");
  check_percent(p.bed_percent, "bed percent");
  check_percent(p.scalp_percent, "scalp percent");
  check_percent(p.isolation_percent, "isolation percent");
  check_percent(p.drug_percent, "drug percent");
  SplitMix64 rng(p.seed);
  CtsInstance inst;
  inst.slots = p.slots;
  const int max_t = std::max(2, p.max_therapy > 0 ? p.max_therapy : p.slots / 3);

  for (int i = 0; i < p.patients; ++i) {
    CtsPatient pt;
    pt.id = "p" + std::to_string(i + 1);
    pt.durations = {rng.uniform(1, 2), rng.uniform(1, 2), rng.uniform(1, 3), rng.uniform(2, max_t)};
    while (pt.durations[0] + pt.durations[1] + pt.durations[2] + pt.durations[3] > p.slots) {
      auto it = std::max_element(pt.durations.rbegin(), pt.durations.rend());
      --*it;
    }
    pt.preferred = rng.chance(p.bed_percent, 100) ? ResourceType::Bed : ResourceType::Chair;
    pt.scalp_cooling = rng.chance(p.scalp_percent, 100);
    pt.isolation = rng.chance(p.isolation_percent, 100);
    if (rng.chance(p.drug_percent, 100)) {
      int ready = rng.uniform(p.slots / 4, p.slots / 2);
      pt.drug_ready = std::max(0, std::min(ready, p.slots - pt.durations[3]));
    }
    inst.patients.push_back(pt);
  }

  const int N = p.patients;
  int R = N == 0 ? 1 : std::max(1, static_cast<int>(std::lround(N / p.tightness)));
  if (N > 0) check_ratio(static_cast<double>(N) / R, p.tightness);
  int want_beds = 0;
  for (const auto& pt : inst.patients) want_beds += pt.preferred == ResourceType::Bed;
  int beds;
  if (R >= N) beds = want_beds + (R - N) * p.bed_percent / 100;
  else beds = static_cast<int>(std::lround(static_cast<double>(R) * want_beds / N));
  const int chairs = R - beds;

  int room_count = 0;
  auto add_type = [&](ResourceType type, int count) {
    int need = 0;
    for (const auto& pt : inst.patients) need += pt.preferred == type && pt.scalp_cooling;
    int scalp = std::min(count, std::max(need, count * p.scalp_percent / 100));
    for (int k = 0; k < count; ++k) {
      if (k % p.room_size == 0) inst.rooms.push_back({"room" + std::to_string(++room_count), {}});
      CtsResource r;
      r.id = std::string(type_name(type)) + std::to_string(k + 1);
      r.type = type;
      r.room = inst.rooms.back().id;
      r.scalp_cooling = k < scalp;
      inst.rooms.back().resources.push_back(r.id);
      inst.resources.push_back(r);
    }
  };
  add_type(ResourceType::Bed, beds);
  add_type(ResourceType::Chair, chairs);

  for (int ph = 0; ph < 3; ++ph) {
    if (p.staff[ph] > 0) {
      inst.staff_capacity[ph] = p.staff[ph];
      continue;
    }
    double total = 0;
    for (const auto& pt : inst.patients) total += pt.durations[ph];
    inst.staff_capacity[ph] = std::max(1, static_cast<int>(std::ceil(total / std::max(1, p.slots / 2))));
  }
  validate_cts(inst);
  return inst;
}

OrsInstance generate_ors(const OrsGenParams& p) {
  if (p.registrations < 0) throw GeneratorError("registrations must not be negative");
  if (p.horizon < 1) throw GeneratorError("horizon must be at least 1 day");
  if (p.specialties < 1) throw GeneratorError("specialties must be at least 1");
  if (!(p.tightness > 0)) throw GeneratorError("tightness must be positive");
  if (p.min_duration < 1 || p.max_duration < p.min_duration) throw GeneratorError("bad duration range");
  if (p.units < 0 || p.beds < 0) throw GeneratorError("units and beds must not be negative");
  if (p.units == 0 && p.scu_percent > 0) throw GeneratorError("SCU registrations need at least one unit");
  check_percent(p.scu_percent, "scu percent");
  check_percent(p.p1_percent, "p1 percent");
  check_percent(p.p2_percent, "p2 percent");
  if (p.p1_percent + p.p2_percent > 100) throw GeneratorError("priority percents exceed 100");
  SplitMix64 rng(p.seed);
  OrsInstance inst;
  inst.horizon = p.horizon;
  for (int u = 0; u < p.units; ++u) inst.units.push_back({"scu" + std::to_string(u + 1), 0});

  std::vector<long long> demand(static_cast<std::size_t>(p.specialties), 0);
  for (int i = 0; i < p.registrations; ++i) {
    OrsRegistration r;
    r.id = "r" + std::to_string(i + 1);
    int sp = rng.uniform(0, p.specialties - 1);
    r.specialty = "sp" + std::to_string(sp + 1);
    r.duration = rng.uniform(p.min_duration, p.max_duration);
    int roll = rng.uniform(1, 100);
    r.priority = roll <= p.p1_percent ? 1 : roll <= p.p1_percent + p.p2_percent ? 2 : 3;
    if (rng.chance(p.scu_percent, 100)) {
      int u = rng.uniform(0, p.units - 1);
      r.scu = ScuNeed{inst.units[u].id, rng.uniform(1, 3)};
      if (p.beds == 0) ++inst.units[u].beds;
    }
    demand[sp] += r.duration;
    inst.registrations.push_back(r);
  }
  if (p.beds > 0)
    for (auto& u : inst.units) u.beds = p.beds;

  static const int lengths[] = {240, 300, 360, 480};
  int shift_no = 0;
  for (int sp = 0; sp < p.specialties; ++sp) {
    if (demand[sp] == 0) continue;
    double remaining = static_cast<double>(demand[sp]) / p.tightness;
    while (remaining > 0) {
      int len = lengths[rng.uniform(0, 3)];
      if (len > remaining) len = std::max(1, static_cast<int>(std::ceil(remaining)));
      OrsShift s;
      s.id = "s" + std::to_string(++shift_no);
      s.day = rng.uniform(0, p.horizon - 1);
      s.room = "or" + std::to_string(rng.uniform(1, std::max(1, p.specialties)));
      s.specialty = "sp" + std::to_string(sp + 1);
      s.length = len;
      inst.shifts.push_back(s);
      remaining -= len;
    }
  }
  if (p.registrations > 0) check_ratio(ors_tightness(inst), p.tightness);
  validate_ors(inst);
  return inst;
}

PoacInstance generate_poac(const PoacGenParams& p) {
  if (p.patients < 0) throw GeneratorError("patients must not be negative");
  if (p.days < 1) throw GeneratorError("days must be at least 1");
  if (p.areas < 1 || p.exams_per_area < 1) throw GeneratorError("need at least one area and one exam per area");
  if (p.max_exams < 1) throw GeneratorError("max exams must be at least 1");
  if (!(p.tightness > 0)) throw GeneratorError("tightness must be positive");
  SplitMix64 rng(p.seed);
  PoacInstance inst;
  inst.days = p.days;
  inst.doctors_per_day = p.doctors < 0 ? p.areas : p.doctors;
  for (int a = 0; a < p.areas; ++a) inst.areas.push_back({"a" + std::to_string(a + 1), 1});
  const int E = p.areas * p.exams_per_area;
  for (int e = 0; e < E; ++e) inst.exams.push_back({"e" + std::to_string(e + 1), inst.areas[e % p.areas].id});

  long long visits = 0;
  for (int i = 0; i < p.patients; ++i) {
    PoacPatient pt;
    pt.id = "p" + std::to_string(i + 1);
    pt.due_day = rng.uniform(0, p.days - 1);
    int k = rng.uniform(1, std::min(p.max_exams, E));
    std::vector<int> pool(static_cast<std::size_t>(E));
    for (int e = 0; e < E; ++e) pool[e] = e;
    for (int j = 0; j < k; ++j) std::swap(pool[j], pool[rng.uniform(j, E - 1)]);
    std::vector<int> picked(pool.begin(), pool.begin() + k);
    std::sort(picked.begin(), picked.end());
    std::set<int> areas;
    for (int e : picked) {
      pt.exams.push_back(inst.exams[e].id);
      areas.insert(e % p.areas);
    }
    visits += static_cast<long long>(areas.size());
    inst.patients.push_back(pt);
  }

  int total = std::max(p.areas, static_cast<int>(std::lround(visits / (p.tightness * p.days))));
  for (int a = 0; a < p.areas; ++a) inst.areas[a].capacity = total / p.areas + (a < total % p.areas ? 1 : 0);
  if (p.patients > 0) check_ratio(poac_tightness(inst), p.tightness);
  validate_poac(inst);
  return inst;
}

}  // namespace medsched

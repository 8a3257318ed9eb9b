#include "cppso/datasets.hpp"

#include <stdexcept>

namespace cppso {

char rel_f(char x) { return static_cast<char>('0' + (x - '0' + 1) % 10); }
char rel_g(char x) { return static_cast<char>('0' + (x - '0' + 2) % 10); }

std::string instantiate(PatternTag tag, char a, char b) {
  switch (tag) {
    case PatternTag::ABA:
      return {a, b, a};
    case PatternTag::ABf:
      return {a, b, rel_f(a)};
    case PatternTag::ABAf:
      return {a, b, a, rel_f(a)};
    case PatternTag::ABg:
      return {a, b, rel_g(a)};
    case PatternTag::ABAf_gf:
      return {a, b, a, rel_f(a), rel_g(rel_f(a))};
  }
  throw std::logic_error("unknown pattern");
}

std::string sample_sentence(PatternTag tag, RngStream& rng, std::string_view a_choices) {
  char a = a_choices.empty()
               ? static_cast<char>('0' + rng.next_below(10))
               : a_choices[rng.next_below(static_cast<std::uint32_t>(a_choices.size()))];
  char b = static_cast<char>('0' + rng.next_below(10));
  return instantiate(tag, a, b);
}

std::vector<std::string> gen_dataset(PatternTag tag, int count, RngStream& rng,
                                     std::string_view a_choices) {
  std::vector<std::string> out;
  out.reserve(static_cast<size_t>(count));
  for (int i = 0; i < count; ++i) out.push_back(sample_sentence(tag, rng, a_choices));
  return out;
}

const char* to_string(PatternTag tag) {
  switch (tag) {
    case PatternTag::ABA:
      return "ABA";
    case PatternTag::ABf:
      return "ABf";
    case PatternTag::ABAf:
      return "ABAf";
    case PatternTag::ABg:
      return "ABg";
    case PatternTag::ABAf_gf:
      return "ABAf_gf";
  }
  return "?";
}

const char* to_string(ExperimentId id) {
  switch (id) {
    case ExperimentId::A1:
      return "A1";
    case ExperimentId::A2:
      return "A2";
    case ExperimentId::A3:
      return "A3";
    case ExperimentId::A4:
      return "A4";
    case ExperimentId::A5:
      return "A5";
    case ExperimentId::A6:
      return "A6";
    case ExperimentId::A7:
      return "A7";
  }
  return "?";
}

ExperimentId experiment_from_string(const std::string& s) {
  for (int i = 0; i < 7; ++i) {
    auto id = static_cast<ExperimentId>(i);
    if (s == to_string(id)) return id;
  }
  throw std::invalid_argument("unknown experiment id: " + s);
}

CurriculumSchedule schedule_for(ExperimentId id) {
  using P = PatternTag;
  CurriculumSchedule s;
  s.dataset_size = 100;
  switch (id) {
    case ExperimentId::A1:
      s.phases = {{100, P::ABA, 0}};
      break;
    case ExperimentId::A2:
      s.phases = {{50, P::ABA, 0}, {50, P::ABf, 2}, {50, P::ABf, 0}};
      break;
    case ExperimentId::A3:
      s.phases = {{50, P::ABA, 0}, {50, P::ABAf, 2}, {50, P::ABAf, 0}};
      break;
    case ExperimentId::A4:
      s.phases = {{50, P::ABA, 0},
                  {50, P::ABf, 2},
                  {50, P::ABf, 0},
                  {50, P::ABg, 2},
                  {50, P::ABg, 0}};
      break;
    case ExperimentId::A5:
      s.phases = {{50, P::ABA, 0},
                  {50, P::ABAf, 2},
                  {50, P::ABAf, 0},
                  {50, P::ABAf_gf, 2},
                  {50, P::ABAf_gf, 0}};
      break;
    case ExperimentId::A6:
    case ExperimentId::A7:
      s.phases = {{50, P::ABA, 0}, {50, P::ABg, 2}, {50, P::ABg, 0}};
      break;
  }
  return s;
}

CurriculumRunner::CurriculumRunner(const CurriculumSchedule& schedule,
                                   const KeyChain& key)
    : schedule_(schedule), key_(key) {}

const CurriculumPhase* CurriculumRunner::phase_at(int epoch, int& phase_index) const {
  int start = 1;
  for (size_t p = 0; p < schedule_.phases.size(); ++p) {
    if (epoch < start + schedule_.phases[p].epochs) {
      phase_index = static_cast<int>(p);
      return &schedule_.phases[p];
    }
    start += schedule_.phases[p].epochs;
  }
  phase_index = -1;
  return nullptr;
}

std::vector<std::string> CurriculumRunner::initial_dataset() {
  if (schedule_.phases.empty()) return {};
  RngStream rng = key_.with(rng_tag::kDataset).with(0).stream();
  return gen_dataset(schedule_.phases[0].pattern, schedule_.dataset_size, rng);
}

std::vector<SlotChange> CurriculumRunner::changes_for_epoch(int epoch) {
  int phase_index = -1;
  const CurriculumPhase* phase = phase_at(epoch, phase_index);
  if (!phase || phase->replace_per_epoch <= 0) return {};
  if (phase_index != active_phase_) {
    active_phase_ = phase_index;
    pending_.clear();
    for (int i = 0; i < schedule_.dataset_size; ++i) pending_.push_back(i);
  }
  if (static_cast<int>(pending_.size()) < phase->replace_per_epoch)
    throw std::logic_error("curriculum phase exhausted its replaceable slots");
  RngStream rng = key_.with(rng_tag::kDataset).with(static_cast<std::uint64_t>(epoch)).stream();
  std::vector<SlotChange> changes;
  for (int r = 0; r < phase->replace_per_epoch && !pending_.empty(); ++r) {
    auto at = rng.next_below(static_cast<std::uint32_t>(pending_.size()));
    int slot = pending_[at];
    pending_[at] = pending_.back();
    pending_.pop_back();
    changes.push_back(SlotChange{slot, sample_sentence(phase->pattern, rng)});
  }
  return changes;
}

}  // namespace cppso

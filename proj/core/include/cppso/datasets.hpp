#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "cppso/rng.hpp"

namespace cppso {

// Sentence shapes over the digit alphabet. A and B are uniform digits,
// f(x) = (x+1) % 10, g(x) = (x+2) % 10.
enum class PatternTag { ABA, ABf, ABAf, ABg, ABAf_gf };

char rel_f(char x);
char rel_g(char x);

// "ABA" -> A B A, "ABf" -> A B f(A), "ABAf" -> A B A f(A),
// "ABg" -> A B g(A), "ABAf_gf" -> A B A f(A) g(f(A)).
std::string instantiate(PatternTag tag, char a, char b);

// a_choices restricts the letters A may take (generalization probes train on
// 0-6 only); empty means all ten digits. B is always unrestricted.
std::string sample_sentence(PatternTag tag, RngStream& rng, std::string_view a_choices = {});
std::vector<std::string> gen_dataset(PatternTag tag, int count, RngStream& rng,
                                     std::string_view a_choices = {});

const char* to_string(PatternTag tag);

enum class ExperimentId { A1, A2, A3, A4, A5, A6, A7 };

const char* to_string(ExperimentId id);
ExperimentId experiment_from_string(const std::string& s);

// One phase of a training curriculum: either hold the dataset fixed, or
// (replace_per_epoch > 0) upgrade that many randomly chosen not-yet-upgraded
// slots to fresh samples of `pattern` at the start of every epoch.
struct CurriculumPhase {
  int epochs = 0;
  PatternTag pattern = PatternTag::ABA;
  int replace_per_epoch = 0;
};

struct CurriculumSchedule {
  std::vector<CurriculumPhase> phases;
  int dataset_size = 100;

  int total_epochs() const {
    int t = 0;
    for (const auto& p : phases) t += p.epochs;
    return t;
  }
};

// The published training procedures:
//   A1:          ABA x100
//   A2:          ABA x50, mix->ABf x50, ABf x50
//   A3:          ABA x50, mix->ABAf x50, ABAf x50
//   A4:          ABA x50, mix->ABf x50, ABf x50, mix->ABg x50, ABg x50
//   A5:          ABA x50, mix->ABAf x50, ABAf x50, mix->ABAf_gf x50, ABAf_gf x50
//   A6, A7:      ABA x50, mix->ABg x50, ABg x50
// All mixing phases replace 2 slots per epoch over 100-sentence datasets.
CurriculumSchedule schedule_for(ExperimentId id);

struct SlotChange {
  int slot = 0;
  std::string x;
};

// Replays a schedule deterministically: the initial dataset and every
// epoch's slot upgrades are pure functions of the construction key. Slot
// picks are without repetition within a mixing phase, so a phase of
// 2 x 50 replacements turns over a 100-sentence dataset exactly.
class CurriculumRunner {
 public:
  CurriculumRunner(const CurriculumSchedule& schedule, const KeyChain& key);

  std::vector<std::string> initial_dataset();

  // Mutations to apply before running `epoch` (1-based, in order).
  std::vector<SlotChange> changes_for_epoch(int epoch);

 private:
  const CurriculumPhase* phase_at(int epoch, int& phase_index) const;

  CurriculumSchedule schedule_;
  KeyChain key_;
  std::vector<int> pending_;
  int active_phase_ = -1;
};

}  // namespace cppso

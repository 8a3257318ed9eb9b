#pragma once

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <string>

#include "cppso/datasets.hpp"
#include "cppso/fixtures.hpp"
#include "cppso/model.hpp"

namespace testutil {

// True when s is exactly the sentence the pattern would build from its own
// first two letters.
inline bool matches_pattern(cppso::PatternTag tag, const std::string& s) {
  if (s.size() < 2) return false;
  return s == cppso::instantiate(tag, s[0], s[1]);
}

// Scratch directory removed on destruction.
class TempDir {
 public:
  TempDir() {
    std::string tmpl = (std::filesystem::temp_directory_path() / "cppso_test_XXXXXX").string();
    path_ = mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::string& path() const { return path_; }
  std::string file(const std::string& name) const { return path_ + "/" + name; }

 private:
  std::string path_;
};

// Two-letter pair-printing model with a prior so concentrated on the wiring
// that structure draws are effectively deterministic while the two letter
// draws stay uniform; the whole observation distribution is then known in
// closed form (letters follow an urn, so repeats are boosted):
//   p("11") = p("22") = 1/2 * (a+1)/(2a+1),
//   p("12") = p("21") = 1/2 * a/(2a+1).
struct SpikyMini {
  cppso::ModelStructure model;
  cppso::PriorSpec prior;
  double letter_alpha = 0.7;
};

inline SpikyMini spiky_mini(double letter_alpha = 0.7) {
  using namespace cppso;
  SpikyMini s;
  s.letter_alpha = letter_alpha;
  s.model = aba_mini_fixture().model;
  const SymbolId ob1 = 0, ob2 = 1, id = 2, c1 = 3, root = 4, n1 = 5;
  const int n = s.model.num_symbols;
  const double kBig = 1e9, kTiny = 1e-9;
  PriorSpec p;
  p.cn[c1] = Eigen::VectorXd::Constant(n, kTiny);
  p.cn[c1][ob1] = letter_alpha;
  p.cn[c1][ob2] = letter_alpha;
  p.cm[root] = Eigen::MatrixXd::Constant(n, n, kTiny);
  p.cm[root](n1, n1) = kBig;
  p.cm[n1] = Eigen::MatrixXd::Constant(n, n, kTiny);
  p.cm[n1](c1, id) = kBig;
  s.prior = std::move(p);
  return s;
}

inline double spiky_prob(const SpikyMini& s, const std::string& x) {
  const double a = s.letter_alpha;
  if (x.size() != 2) return 0.0;
  return x[0] == x[1] ? 0.5 * (a + 1.0) / (2.0 * a + 1.0)
                      : 0.5 * a / (2.0 * a + 1.0);
}

}  // namespace testutil

#pragma once

// Small weighted grammar used for the end-to-end training checks. Bracketing
// is recoverable from span content (preterminal word classes are disjoint and
// prepositional phrases attach to noun phrases only), so a span scorer can
// reach high F1 on held-out samples.

#include <string>
#include <vector>

#include "rulecky/rng.hpp"
#include "rulecky/tree.hpp"

namespace rulecky::testing {

class ToyGrammar {
 public:
  Tree sample(DetRng& rng, int32_t max_depth = 5) const {
    return sample_symbol("S", rng, max_depth);
  }

  /// Rejection-samples trees whose yield length is within [min_len, max_len].
  std::vector<Tree> sample_corpus(DetRng& rng, int32_t count, int32_t min_len,
                                  int32_t max_len) const {
    std::vector<Tree> corpus;
    while (static_cast<int32_t>(corpus.size()) < count) {
      Tree tree = sample(rng);
      int32_t n = leaf_count(tree);
      if (n < min_len || n > max_len) continue;
      corpus.push_back(std::move(tree));
    }
    return corpus;
  }

 private:
  static const std::vector<std::string>& words_for(const std::string& pos) {
    static const std::vector<std::string> det = {"the", "a", "every", "some"};
    static const std::vector<std::string> noun = {"dog",  "cat",   "bird",
                                                  "fish", "horse", "stone"};
    static const std::vector<std::string> adj = {"big", "small", "red", "old"};
    static const std::vector<std::string> verb = {"sees", "likes", "finds",
                                                  "chases", "holds"};
    static const std::vector<std::string> name = {"alice", "bob", "carol"};
    static const std::vector<std::string> prep = {"with", "near", "under"};
    static const std::vector<std::string> adv = {"often", "quickly"};
    if (pos == "DT") return det;
    if (pos == "NN") return noun;
    if (pos == "JJ") return adj;
    if (pos == "VB") return verb;
    if (pos == "NNP") return name;
    if (pos == "IN") return prep;
    return adv;  // "RB"
  }

  static Tree sample_pos(const std::string& pos, DetRng& rng) {
    const auto& words = words_for(pos);
    return Tree(pos, words[static_cast<std::size_t>(
                         rng.next_below(static_cast<int64_t>(words.size())))]);
  }

  Tree sample_symbol(const std::string& symbol, DetRng& rng,
                     int32_t depth) const {
    if (symbol == "S")
      return Tree("S", {sample_symbol("NP", rng, depth - 1),
                        sample_symbol("VP", rng, depth - 1)});
    if (symbol == "NP") {
      int64_t roll = rng.next_below(100);
      if (roll < 10 && depth > 0)  // NP -> NP PP
        return Tree("NP", {sample_symbol("NP", rng, depth - 1),
                           sample_symbol("PP", rng, depth - 1)});
      if (roll < 35)  // NP -> NNP (one-word constituent)
        return Tree("NP", {sample_pos("NNP", rng)});
      if (roll < 55)  // NP -> DT JJ NN
        return Tree("NP", {sample_pos("DT", rng), sample_pos("JJ", rng),
                           sample_pos("NN", rng)});
      return Tree("NP", {sample_pos("DT", rng), sample_pos("NN", rng)});
    }
    if (symbol == "VP") {
      int64_t roll = rng.next_below(100);
      if (roll < 20)  // VP -> VB PP
        return Tree("VP", {sample_pos("VB", rng),
                           sample_symbol("PP", rng, depth - 1)});
      if (roll < 40)  // VP -> RB VB NP
        return Tree("VP", {sample_pos("RB", rng), sample_pos("VB", rng),
                           sample_symbol("NP", rng, depth - 1)});
      return Tree("VP", {sample_pos("VB", rng),
                         sample_symbol("NP", rng, depth - 1)});
    }
    // PP -> IN NP
    return Tree("PP", {sample_pos("IN", rng),
                       sample_symbol("NP", rng, depth - 1)});
  }
};

}  // namespace rulecky::testing

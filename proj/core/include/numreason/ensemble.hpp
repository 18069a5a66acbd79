#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "numreason/candidates.hpp"
#include "numreason/error.hpp"

namespace numreason {

struct EnsembleConfig {
  double t_loss = 0.01;
  double t_score = -0.15;

  /// Throws std::invalid_argument unless t_loss > 0.
  void validate() const;
};

enum class Rule {
  loss_a,
  loss_b,
  score,
  mixed_1_keep,
  mixed_1_fallback,
  mixed_2_keep,
  mixed_2_fallback,
  degenerate,
};

/// "LOSS_A", "MIXED_2_FALLBACK", ...
std::string_view to_string(Rule rule);

struct EnsembleDecision {
  CandidateProgram chosen;
  Rule rule = Rule::degenerate;
  /// Every predicate evaluated on the way to `chosen`, in order.
  std::vector<std::string> trace;
};

/// The four generator outputs of one document; any slot may be missing.
struct EnsembleInputs {
  std::optional<CandidateProgram> cf;
  std::optional<CandidateProgram> rf;
  std::optional<CandidateProgram> cu;
  std::optional<CandidateProgram> ru;

  /// Fills the slots from candidates whose source is cf/rf/cu/ru.
  static EnsembleInputs from(const std::vector<CandidateProgram>& candidates);
};

class EnsembleError : public Error {
public:
  using Error::Error;
};

/// Lower loss wins; an exact tie goes to `a`. Throws EnsembleError when
/// either side has no loss.
EnsembleDecision loss_ensemble(const CandidateProgram& a, const CandidateProgram& b);

/// Higher score wins; an exact tie goes to `a`.
EnsembleDecision score_ensemble(const CandidateProgram& a, const CandidateProgram& b);

/// Two-branch rule over the four outputs.
///
/// The beam-scored pair is reduced first: O_u = score_ensemble(cu, ru), or
/// the one present. The loss-ranked pair selects the branch: cf when
/// loss(cf) < loss(rf), otherwise rf (ties go to rf). The branch candidate
/// W is replaced by O_u when W is not executable, or when loss(W) > t_loss
/// and score(O_u) > t_score, both strict. If O_u itself is not executable
/// W is kept.
///
/// When cf/rf lack losses or no scored O_u exists the first executable
/// candidate in the order cf, rf, cu, ru is returned (or the first present
/// one) with rule DEGENERATE. Throws EnsembleError when all four are
/// missing or the slots disagree on doc_id or source.
EnsembleDecision mixed_ensemble(const EnsembleInputs& inputs, const EnsembleConfig& config = {});

}  // namespace numreason

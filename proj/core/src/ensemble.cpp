#include "numreason/ensemble.hpp"

#include <stdexcept>

#include "numreason/text.hpp"

namespace numreason {
namespace {

std::string num(double v) { return text::format_number(v); }

const char* yes_no(bool b) { return b ? "true" : "false"; }

void require(const CandidateProgram& c, const std::optional<double>& field, const char* what) {
  if (!field)
    throw EnsembleError("candidate '" + c.source + "' of document '" + c.doc_id + "' has no " + what);
}

}  // namespace

void EnsembleConfig::validate() const {
  if (!(t_loss > 0.0)) throw std::invalid_argument("t_loss must be positive");
}

std::string_view to_string(Rule rule) {
  switch (rule) {
    case Rule::loss_a: return "LOSS_A";
    case Rule::loss_b: return "LOSS_B";
    case Rule::score: return "SCORE";
    case Rule::mixed_1_keep: return "MIXED_1_KEEP";
    case Rule::mixed_1_fallback: return "MIXED_1_FALLBACK";
    case Rule::mixed_2_keep: return "MIXED_2_KEEP";
    case Rule::mixed_2_fallback: return "MIXED_2_FALLBACK";
    case Rule::degenerate: return "DEGENERATE";
  }
  return "UNKNOWN";
}

EnsembleInputs EnsembleInputs::from(const std::vector<CandidateProgram>& candidates) {
  EnsembleInputs in;
  for (const auto& c : candidates) {
    if (c.source == "cf") in.cf = c;
    else if (c.source == "rf") in.rf = c;
    else if (c.source == "cu") in.cu = c;
    else if (c.source == "ru") in.ru = c;
  }
  return in;
}

EnsembleDecision loss_ensemble(const CandidateProgram& a, const CandidateProgram& b) {
  require(a, a.loss, "loss");
  require(b, b.loss, "loss");
  EnsembleDecision d;
  const bool pick_b = *b.loss < *a.loss;
  d.trace.push_back("loss(" + a.source + ")=" + num(*a.loss) + " loss(" + b.source + ")=" + num(*b.loss));
  d.trace.push_back(std::string("loss(") + b.source + ") < loss(" + a.source + "): " + yes_no(pick_b));
  if (!pick_b && *a.loss == *b.loss) d.trace.push_back("tie -> first argument");
  d.chosen = pick_b ? b : a;
  d.rule = pick_b ? Rule::loss_b : Rule::loss_a;
  return d;
}

EnsembleDecision score_ensemble(const CandidateProgram& a, const CandidateProgram& b) {
  require(a, a.score, "score");
  require(b, b.score, "score");
  EnsembleDecision d;
  const bool pick_b = *b.score > *a.score;
  d.trace.push_back("score(" + a.source + ")=" + num(*a.score) + " score(" + b.source + ")=" + num(*b.score));
  d.trace.push_back(std::string("score(") + b.source + ") > score(" + a.source + "): " + yes_no(pick_b));
  if (!pick_b && *a.score == *b.score) d.trace.push_back("tie -> first argument");
  d.chosen = pick_b ? b : a;
  d.rule = Rule::score;
  return d;
}

EnsembleDecision mixed_ensemble(const EnsembleInputs& in, const EnsembleConfig& config) {
  config.validate();
  const std::optional<CandidateProgram>* slots[] = {&in.cf, &in.rf, &in.cu, &in.ru};
  const char* names[] = {"cf", "rf", "cu", "ru"};

  const CandidateProgram* first_present = nullptr;
  for (std::size_t i = 0; i < 4; ++i) {
    const auto& slot = *slots[i];
    if (!slot) continue;
    if (slot->source != names[i])
      throw EnsembleError("slot " + std::string(names[i]) + " holds a candidate with source '" + slot->source + "'");
    if (first_present == nullptr) {
      first_present = &*slot;
    } else if (slot->doc_id != first_present->doc_id) {
      throw EnsembleError("ensemble inputs mix documents '" + first_present->doc_id + "' and '" + slot->doc_id + "'");
    }
  }
  if (first_present == nullptr) throw EnsembleError("no candidates to ensemble");

  EnsembleDecision d;

  // Beam-scored pair -> O_u.
  std::optional<CandidateProgram> unified;
  const bool cu_ok = in.cu && in.cu->score;
  const bool ru_ok = in.ru && in.ru->score;
  if (cu_ok && ru_ok) {
    auto pair = score_ensemble(*in.cu, *in.ru);
    d.trace.insert(d.trace.end(), pair.trace.begin(), pair.trace.end());
    unified = pair.chosen;
  } else if (cu_ok) {
    unified = *in.cu;
  } else if (ru_ok) {
    unified = *in.ru;
  }

  const bool losses = in.cf && in.rf && in.cf->loss && in.rf->loss;
  if (!losses || !unified) {
    d.trace.push_back(std::string("preconditions: cf/rf losses ") + (losses ? "present" : "missing") +
                      ", scored O_u " + (unified ? "present" : "missing"));
    for (std::size_t i = 0; i < 4; ++i) {
      const auto& slot = *slots[i];
      if (slot && slot->executable) {
        d.trace.push_back(std::string("first executable candidate: ") + names[i]);
        d.chosen = *slot;
        d.rule = Rule::degenerate;
        return d;
      }
    }
    d.trace.push_back("no executable candidate; first present: " + first_present->source);
    d.chosen = *first_present;
    d.rule = Rule::degenerate;
    return d;
  }

  d.trace.push_back("O_u=" + unified->source);
  const bool branch_one = *in.cf->loss < *in.rf->loss;
  d.trace.push_back("loss(cf)=" + num(*in.cf->loss) + " < loss(rf)=" + num(*in.rf->loss) + ": " +
                    yes_no(branch_one));
  const CandidateProgram& winner = branch_one ? *in.cf : *in.rf;
  const std::string w = winner.source;

  const bool non_exec = !winner.executable;
  const bool loss_high = *winner.loss > config.t_loss;
  const bool score_high = *unified->score > config.t_score;
  d.trace.push_back(w + " executable: " + yes_no(!non_exec));
  d.trace.push_back("loss(" + w + ")=" + num(*winner.loss) + " > t_loss=" + num(config.t_loss) + ": " +
                    yes_no(loss_high));
  d.trace.push_back("score(O_u)=" + num(*unified->score) + " > t_score=" + num(config.t_score) + ": " +
                    yes_no(score_high));

  bool fallback = non_exec || (loss_high && score_high);
  d.trace.push_back(std::string("fallback to O_u: ") + yes_no(fallback));
  if (fallback && !unified->executable) {
    d.trace.push_back("O_u not executable: keep " + w);
    fallback = false;
  }

  d.chosen = fallback ? *unified : winner;
  if (branch_one) {
    d.rule = fallback ? Rule::mixed_1_fallback : Rule::mixed_1_keep;
  } else {
    d.rule = fallback ? Rule::mixed_2_fallback : Rule::mixed_2_keep;
  }
  return d;
}

}  // namespace numreason

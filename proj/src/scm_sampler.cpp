#include "surropub/rng.hpp"
#include "surropub/scm.hpp"

namespace surropub {

namespace {

void draw_record(const ScmModel& model, rng::Engine& eng, Record& rec) {
  for (std::size_t v : model.topo_order()) {
    const Equation& eq = model.equation_of(v);
    const Distribution* dist = nullptr;
    for (const auto& clause : eq.clauses) {
      if (!clause.guard || clause.guard->eval(rec)) {
        dist = &clause.dist;
        break;
      }
    }
    // A default clause always exists, so dist is never null here.
    rec.cells[v] = static_cast<std::uint16_t>(rng::discrete(eng, dist->weights));
  }
}

}  // namespace

ScmSampleResult sample_scm(const ScmModel& model, const GenSpec& spec,
                           std::size_t max_attempts_per_record) {
  if (spec.target_m < 1) throw Error("target_m must be at least 1");
  if (max_attempts_per_record < 1) throw Error("max_attempts_per_record must be at least 1");

  ScmSampleResult out{Dataset(model.schema_ptr(), DatasetRole::Surrogate), {}, {}};
  out.stats.constraint_violations.assign(model.constraints().size(), 0);
  out.data.reserve(spec.target_m);
  out.satisfied.reserve(spec.target_m);

  const std::size_t d = model.schema().variable_count();
  for (std::size_t i = 0; i < spec.target_m; ++i) {
    auto eng = rng::make_engine(spec.seed, i);
    Record rec;
    rec.cells.resize(d);
    bool ok = false;
    for (std::size_t attempt = 0; attempt < max_attempts_per_record; ++attempt) {
      draw_record(model, eng, rec);
      ok = true;
      for (std::size_t c = 0; c < model.constraints().size(); ++c) {
        if (!eval_constraint(model.constraints()[c], rec)) {
          out.stats.constraint_violations[c] += 1;
          ok = false;
        }
      }
      if (ok) break;
      out.stats.rejected_attempts += 1;
    }
    if (!ok) out.stats.unrepaired_records += 1;
    out.satisfied.push_back(ok);
    out.data.add(std::move(rec));
  }
  out.stats.records = spec.target_m;

  if (!model.constraints().empty() && out.stats.unrepaired_records == spec.target_m)
    throw Error("sample_scm: no record satisfied the constraints after " +
                std::to_string(max_attempts_per_record) +
                " attempts each; the constraint set appears unsatisfiable");
  return out;
}

}  // namespace surropub

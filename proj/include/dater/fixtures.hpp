#pragma once

#include <string>
#include <vector>

#include "dater/dataset.hpp"
#include "dater/pipeline.hpp"
#include "dater/table.hpp"

namespace dater::fixtures {

// Hand-built tables with known query results, used by the engine tests and
// the bundled demo datasets.

// 14 hockey games: 6 with minnesota as the home team, 8 with minnesota as
// the visitor.
Table season_games_table();
// 6 historic places: 1 in barrington, 1 in farmington, 3 in rochester.
Table listings_table();
// 6 seasons: 3 finishes matching %5th%, 2 matching %7th%.
Table standings_table();
// 4 golfers: graeme mcdowell from northern ireland, pádraig harrington not.
Table golfers_table();
// 3 teams: atlético ciudad with 28 matches, no row of theirs below 0.61.
Table division_table();

// Exemplar sets for all prompt stages (authored here, written to JSON by
// write_fixtures).
std::vector<EvidenceExemplar> evidence_exemplars();
std::vector<ClozeExemplar> cloze_exemplars();
std::vector<SqlExemplar> sql_exemplars();
std::vector<JointExemplar> joint_exemplars_fv();   // 4 exemplars
std::vector<JointExemplar> joint_exemplars_qa();   // 2 exemplars
std::vector<JointExemplar> joint_exemplars_free(); // 6 exemplars

// The four demo examples with scripted stage completions.
struct ScriptedExample {
    Example example;
    std::vector<int> evidence_rows;
    std::vector<int> evidence_cols;
    std::string cloze_response;              // qN: lines
    std::vector<std::string> sql_lines;      // one SELECT per placeholder
    std::vector<std::string> joint_samples;  // n_samples completions
};

std::vector<ScriptedExample> demo_qa_examples();
std::vector<ScriptedExample> demo_fv_examples();
// Deterministic synthetic lookup questions whose evidence selections shrink
// each table by far more than 2x on average.
std::vector<ScriptedExample> synthetic_examples(size_t count);

// Writes the whole fixture bundle:
//   <dir>/exemplars/{evidence,cloze,sql,joint_fv,joint_qa,joint_free}.json
//   <dir>/demo/{qa.jsonl,fv.jsonl,replay.jsonl}
//   <dir>/synthetic/{dataset.jsonl,replay.jsonl}
// Replay stores are scripted with exactly the prompts the pipeline builds,
// using temperature `joint_temperature` and `joint_samples` samples for the
// answer stage (decomposition stages always run at temperature 0, n 1).
void write_fixtures(const std::string& dir, int joint_samples, double joint_temperature);

} // namespace dater::fixtures

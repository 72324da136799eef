#pragma once

#include <map>
#include <string>
#include <vector>

#include "dater/provider.hpp"
#include "dater/question.hpp"
#include "dater/table.hpp"

namespace dater {

class UnmappableFvAnswer : public Error {
public:
    using Error::Error;
};
class AllSamplesUnmappable : public Error {
public:
    using Error::Error;
};

enum class Task {
    FactVerification, // yes/no verdicts
    QuestionAnswering, // short answers
    FreeForm,          // sentence-long answers
};

std::string task_name(Task task);
Task task_from_name(const std::string& name);

struct JointExemplar {
    Table table;
    std::vector<std::string> sub_questions;
    std::string question;
    std::string answer;
};

struct AnswerRecord {
    Task task = Task::QuestionAnswering;
    std::vector<std::string> samples;          // raw completions, in order
    std::map<std::string, int> normalized_votes;
    std::string final;
    bool fallback_used = false;   // no sample could be mapped to a verdict
    bool tie_break_applied = false;
    int discarded = 0;            // fact-verification samples that mapped to neither verdict
};

// Exemplars (sub-table, backfilled sub-questions, question, "A: <answer>"),
// then the test instance ending at "A:".
std::string build_joint_prompt(const Table& sub_table,
                               const BackfilledQuestion& backfilled,
                               const std::string& question,
                               const std::vector<JointExemplar>& exemplars);

// Canonical comparison form: lowercase, trimmed, answer-prefix chatter
// removed, one trailing period stripped, whitespace collapsed, numbers
// rewritten canonically. Fact verification additionally maps true/yes and
// false/no onto "yes"/"no" and throws UnmappableFvAnswer for anything else.
std::string normalize_answer(const std::string& text, Task task);

// Plurality vote over normalized samples; ties break to the
// lexicographically smallest answer. Fact-verification samples that map to
// neither verdict are discarded; when none survive the final answer is "no"
// with fallback_used set. Free-form answers skip voting: the first sample
// (trimmed) is the final answer.
AnswerRecord vote(const std::vector<std::string>& samples, Task task);

// Full stage: prompt the model with n samples at the given temperature and
// vote. `n` must be >= 1.
AnswerRecord answer(const Table& sub_table,
                    const BackfilledQuestion& backfilled,
                    const std::string& question,
                    llm::Provider& provider,
                    const std::vector<JointExemplar>& exemplars,
                    int n,
                    double temperature,
                    Task task);

} // namespace dater

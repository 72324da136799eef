#include "dater/reasoner.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <sstream>

#include "dater/text.hpp"

namespace dater {

using namespace text;

namespace {

// Chatter the model may put in front of the actual answer, longest first.
const char* const kAnswerPrefixes[] = {
    "the answer to the question is",
    "so the final answer is",
    "therefore, the answer is",
    "therefore the answer is",
    "the final answer is",
    "so the answer is",
    "the answer is",
    "final answer:",
    "answer:",
    "a:",
};

bool strip_one_prefix(std::string* text) {
    for (const char* prefix : kAnswerPrefixes) {
        const size_t len = std::strlen(prefix);
        if (text->size() < len || text->compare(0, len, prefix) != 0) continue;
        if (prefix[len - 1] != ':' && text->size() > len &&
            std::isalnum(static_cast<unsigned char>((*text)[len])))
            continue; // prefix ends mid-word ("the answer island")
        std::string rest = trim(text->substr(len));
        while (!rest.empty() && (rest.front() == ':' || rest.front() == ','))
            rest = trim(rest.substr(1));
        if (rest.empty()) return false; // nothing left; keep the text as the answer
        *text = rest;
        return true;
    }
    return false;
}

} // namespace

std::string task_name(Task task) {
    switch (task) {
        case Task::FactVerification: return "fv";
        case Task::QuestionAnswering: return "qa";
        case Task::FreeForm: return "free";
    }
    throw Error("unknown task");
}

Task task_from_name(const std::string& name) {
    if (name == "fv") return Task::FactVerification;
    if (name == "qa") return Task::QuestionAnswering;
    if (name == "free") return Task::FreeForm;
    throw Error("unknown task name: " + name);
}

std::string build_joint_prompt(const Table& sub_table,
                               const BackfilledQuestion& backfilled,
                               const std::string& question,
                               const std::vector<JointExemplar>& exemplars) {
    if (exemplars.empty())
        throw Error("joint prompt requires at least one exemplar");
    std::ostringstream out;
    out << "Answer the question using the table and the sub-questions. Finish "
           "with one line: A: <answer>.\n";
    for (const JointExemplar& ex : exemplars) {
        out << "\n" << linearize(ex.table)
            << "sub-questions:\n"
            << render_sub_questions(ex.sub_questions) << "\n"
            << "question : " << ex.question << "\n"
            << "A: " << ex.answer << "\n";
    }
    std::vector<std::string> segments =
        backfilled.segments.empty() ? std::vector<std::string>{question} : backfilled.segments;
    out << "\n" << linearize(sub_table)
        << "sub-questions:\n"
        << render_sub_questions(segments) << "\n"
        << "question : " << question << "\n"
        << "A:";
    return out.str();
}

std::string normalize_answer(const std::string& text, Task task) {
    std::string t = to_lower(trim(text));
    while (strip_one_prefix(&t)) {
    }
    if (!t.empty() && t.back() == '.') t.pop_back();
    t = collapse_spaces(trim(t));
    if (std::optional<double> num = parse_number(t)) t = format_number(*num);
    if (task == Task::FactVerification) {
        if (t == "yes" || t == "true") return "yes";
        if (t == "no" || t == "false") return "no";
        throw UnmappableFvAnswer("cannot map \"" + t + "\" to yes/no");
    }
    return t;
}

AnswerRecord vote(const std::vector<std::string>& samples, Task task) {
    if (samples.empty()) throw Error("vote requires at least one sample");
    AnswerRecord record;
    record.task = task;
    record.samples = samples;
    for (const std::string& s : samples) {
        if (task == Task::FactVerification) {
            try {
                ++record.normalized_votes[normalize_answer(s, task)];
            } catch (const UnmappableFvAnswer&) {
                ++record.discarded;
            }
        } else {
            ++record.normalized_votes[normalize_answer(s, Task::QuestionAnswering)];
        }
    }

    if (task == Task::FreeForm) {
        record.final = trim(samples.front());
        return record;
    }
    if (record.normalized_votes.empty()) {
        // Every sample was unmappable; fail closed on the negative verdict.
        record.final = "no";
        record.fallback_used = true;
        return record;
    }
    int best = 0;
    for (const auto& [answer_text, count] : record.normalized_votes) best = std::max(best, count);
    int winners = 0;
    for (const auto& [answer_text, count] : record.normalized_votes) {
        if (count != best) continue;
        if (winners == 0) record.final = answer_text; // map is sorted: first is smallest
        ++winners;
    }
    record.tie_break_applied = winners > 1;
    return record;
}

AnswerRecord answer(const Table& sub_table,
                    const BackfilledQuestion& backfilled,
                    const std::string& question,
                    llm::Provider& provider,
                    const std::vector<JointExemplar>& exemplars,
                    int n,
                    double temperature,
                    Task task) {
    if (n < 1) throw Error("answer requires n >= 1 samples");
    llm::CompletionRequest req;
    req.prompt = build_joint_prompt(sub_table, backfilled, question, exemplars);
    req.temperature = temperature;
    req.n = n;
    req.max_tokens = 512;
    req.stop = {"\n\n"};
    llm::CompletionResponse resp = provider.complete(req);
    return vote(resp.samples, task);
}

} // namespace dater

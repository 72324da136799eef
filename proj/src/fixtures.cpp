#include "dater/fixtures.hpp"

#include <filesystem>
#include <random>
#include <sstream>

#include "dater/evidence.hpp"
#include "dater/provider.hpp"
#include "dater/question.hpp"
#include "dater/reasoner.hpp"
#include "dater/sql.hpp"
#include "dater/text.hpp"

namespace dater::fixtures {

using namespace text;

namespace {

Table roster_table() {
    return Table("1948 wildcats roster", {"player", "position", "games", "points"},
                 {{"alex groza", "center", "34", "510"},
                  {"ralph beard", "guard", "34", "350"},
                  {"wallace jones", "forward", "30", "280"}});
}

Table grand_prix_table() {
    return Table("1991 grand prix results", {"driver", "team", "laps", "time"},
                 {{"ayrton senna", "mclaren", "71", "1:35:21"},
                  {"alain prost", "ferrari", "71", "+ 4.9"},
                  {"nigel mansell", "williams", "70", "+ 1 lap"}});
}

Table parks_table() {
    return Table("city parks", {"park", "area", "opened"},
                 {{"riverside", "12", "1901"},
                  {"hillcrest", "8", "1922"},
                  {"elm grove", "15", "1899"}});
}

Table rivers_table() {
    return Table("rivers of the valley", {"river", "length", "mouth"},
                 {{"silver creek", "120", "lake norden"},
                  {"black river", "340", "gulf of tarn"},
                  {"white fork", "85", "silver creek"}});
}

std::string render_lines(const std::vector<std::string>& lines) {
    std::ostringstream out;
    for (size_t i = 0; i < lines.size(); ++i) out << (i ? "\n" : "") << lines[i];
    return out.str();
}

std::string render_selection_response(const Table& table, const std::vector<int>& rows,
                                      const std::vector<int>& cols) {
    std::ostringstream out;
    out << "ROWS: [";
    for (size_t i = 0; i < rows.size(); ++i) out << (i ? ", " : "") << rows[i];
    out << "]\nCOLS: [";
    for (size_t i = 0; i < cols.size(); ++i)
        out << (i ? ", " : "")
            << table.normalized_headers()[static_cast<size_t>(cols[i]) - 1];
    out << "]";
    return out.str();
}

void script(llm::ReplayStore& store, const std::string& prompt, double temperature, int n,
            std::vector<std::string> samples) {
    llm::CompletionRequest request;
    request.prompt = prompt;
    request.temperature = temperature;
    request.n = n;
    llm::CompletionResponse response;
    response.samples = std::move(samples);
    response.model_id = "fixture";
    store.record(request, response);
}

// Walks one example through the same prompt builders the pipeline uses and
// records each stage's scripted completion under the resulting key.
void script_example(llm::ReplayStore& store, const ScriptedExample& s,
                    const StageExemplars& exemplars, int joint_samples,
                    double joint_temperature) {
    const Table& table = s.example.table;
    const std::string& question = s.example.question;

    std::string evidence_response =
        render_selection_response(table, s.evidence_rows, s.evidence_cols);
    script(store, build_evidence_prompt(table, question, exemplars.evidence), 0.0, 1,
           {evidence_response});
    IndexParse parsed = parse_index_response(evidence_response, table);
    Table sub = select_sub_table(table, parsed.selection);

    script(store, build_cloze_prompt(table, question, exemplars.cloze), 0.0, 1,
           {s.cloze_response});
    ClozeQuestion cloze = parse_cloze_response(s.cloze_response);

    BackfilledQuestion backfilled;
    backfilled.segments = cloze.segments;
    if (cloze.placeholder_count() > 0) {
        std::string sql_response = render_lines(s.sql_lines);
        script(store, build_sql_prompt(table, cloze, exemplars.sql), 0.0, 1, {sql_response});
        std::vector<Fill> fills;
        for (const std::string& text : s.sql_lines) {
            sql::SqlQuery query = sql::parse_sql(text, table.normalized_headers());
            fills.push_back({text, sql::format_result(sql::execute(query, table))});
        }
        backfilled = backfill(cloze, fills);
    }

    script(store, build_joint_prompt(sub, backfilled, question, exemplars.joint),
           joint_temperature, joint_samples, s.joint_samples);
}

void write_examples(const std::vector<ScriptedExample>& scripted, const std::string& path) {
    std::vector<Example> examples;
    examples.reserve(scripted.size());
    for (const ScriptedExample& s : scripted) examples.push_back(s.example);
    write_canonical(examples, path);
}

} // namespace

Table season_games_table() {
    return Table(
        "2007 - 08 wild season",
        {"date", "visitor", "score", "home", "attendance"},
        {{"october 4", "chicago", "0 - 1", "minnesota", "18568"},
         {"october 6", "columbus", "2 - 3", "minnesota", "18201"},
         {"october 13", "phoenix", "2 - 4", "minnesota", "18064"},
         {"october 16", "edmonton", "1 - 3", "minnesota", "18103"},
         {"october 20", "colorado", "2 - 3", "minnesota", "18322"},
         {"october 25", "st louis", "2 - 4", "minnesota", "18114"},
         {"october 8", "minnesota", "2 - 1", "anaheim", "17174"},
         {"october 10", "minnesota", "3 - 4", "los angeles", "17580"},
         {"october 12", "minnesota", "1 - 2", "san jose", "17225"},
         {"october 23", "minnesota", "2 - 0", "calgary", "19289"},
         {"october 27", "minnesota", "4 - 2", "edmonton", "16839"},
         {"october 30", "minnesota", "3 - 1", "vancouver", "18630"},
         {"november 1", "minnesota", "2 - 5", "dallas", "17041"},
         {"november 3", "minnesota", "1 - 4", "nashville", "14213"}});
}

Table listings_table() {
    return Table("historic places in the county",
                 {"name", "city or town", "built"},
                 {{"smith house", "barrington", "1875"},
                  {"jones mill", "farmington", "1890"},
                  {"first church", "rochester", "1867"},
                  {"old library", "rochester", "1902"},
                  {"grange hall", "rochester", "1911"},
                  {"stone bridge", "dover", "1880"}});
}

Table standings_table() {
    return Table("franchise season results",
                 {"season", "division", "reg.season", "playoffs"},
                 {{"2001", "central", "3rd", "did not qualify"},
                  {"2002", "central", "5th", "quarterfinals"},
                  {"2003", "central", "7th", "did not qualify"},
                  {"2004", "central", "5th", "semifinals"},
                  {"2005", "central", "7th", "did not qualify"},
                  {"2006", "central", "5th", "champions"}});
}

Table golfers_table() {
    return Table("2010 open championship",
                 {"place", "player", "country", "score", "to par"},
                 {{"1", "graeme mcdowell", "northern ireland", "71", "even"},
                  {"2", "pádraig harrington", "ireland", "72", "+ 1"},
                  {"3", "tiger woods", "united states", "73", "+ 2"},
                  {"4", "lee westwood", "england", "74", "+ 3"}});
}

Table division_table() {
    return Table("segunda división b standings",
                 {"team", "matches", "wins", "average"},
                 {{"atlético ciudad", "28", "9", "0.82"},
                  {"real murcia", "30", "18", "1.93"},
                  {"lorca deportiva", "28", "7", "0.61"}});
}

std::vector<EvidenceExemplar> evidence_exemplars() {
    return {
        EvidenceExemplar{roster_table(), "how many points did ralph beard score?",
                         IndexSelection::normalized({2}, {1, 4})},
        EvidenceExemplar{grand_prix_table(), "which driver completed the fewest laps?",
                         IndexSelection::normalized({1, 2, 3}, {1, 3})},
    };
}

std::vector<ClozeExemplar> cloze_exemplars() {
    return {
        ClozeExemplar{roster_table(), "alex groza scored more than 400 points",
                      {"alex groza scored {...} points."}},
        ClozeExemplar{grand_prix_table(), "which driver completed the fewest laps?",
                      {"the fewest laps completed was {...}."}},
    };
}

std::vector<SqlExemplar> sql_exemplars() {
    return {
        SqlExemplar{roster_table(),
                    {"alex groza scored {...} points."},
                    {"SELECT points FROM w WHERE player = 'alex groza'"}},
        SqlExemplar{grand_prix_table(),
                    {"the fewest laps completed was {...}."},
                    {"SELECT MIN(laps) FROM w"}},
    };
}

std::vector<JointExemplar> joint_exemplars_fv() {
    return {
        JointExemplar{roster_table(),
                      {"alex groza scored {510} points."},
                      "alex groza scored more than 400 points", "yes"},
        JointExemplar{roster_table(),
                      {"ralph beard scored {350} points."},
                      "ralph beard scored more than 400 points", "no"},
        JointExemplar{parks_table(),
                      {"{2} parks opened before 1910."},
                      "more than one park opened before 1910", "yes"},
        JointExemplar{grand_prix_table(),
                      {"{2} drivers completed 71 laps."},
                      "every driver completed 71 laps", "no"},
    };
}

std::vector<JointExemplar> joint_exemplars_qa() {
    return {
        JointExemplar{parks_table(),
                      {"the largest park area is {15}."},
                      "which park has the largest area?", "elm grove"},
        JointExemplar{grand_prix_table(),
                      {"the fewest laps completed was {70}."},
                      "which driver completed the fewest laps?", "nigel mansell"},
    };
}

std::vector<JointExemplar> joint_exemplars_free() {
    return {
        JointExemplar{parks_table(),
                      {"riverside covers {12} hectares.", "riverside opened in {1901}."},
                      "describe riverside park",
                      "riverside park covers 12 hectares and opened in 1901."},
        JointExemplar{parks_table(),
                      {"the oldest park opened in {1899}."},
                      "which park is the oldest and when did it open?",
                      "elm grove is the oldest park, opened in 1899."},
        JointExemplar{grand_prix_table(),
                      {"ayrton senna completed {71} laps."},
                      "how did ayrton senna finish the race?",
                      "ayrton senna won the race after completing all 71 laps for mclaren."},
        JointExemplar{rivers_table(),
                      {"the longest river is {340} km."},
                      "which river is the longest?",
                      "the black river is the longest at 340 km, ending in the gulf of tarn."},
        JointExemplar{rivers_table(),
                      {"white fork is {85} km long."},
                      "where does white fork end?",
                      "white fork runs 85 km before joining silver creek."},
        JointExemplar{roster_table(),
                      {"alex groza scored {510} points in {34} games."},
                      "summarize alex groza's season",
                      "alex groza led the team with 510 points across 34 games at center."},
    };
}

std::vector<ScriptedExample> demo_qa_examples() {
    std::vector<ScriptedExample> out;

    ScriptedExample listings;
    listings.example.id = "qa-listings";
    listings.example.task = Task::QuestionAnswering;
    listings.example.table = listings_table();
    listings.example.question =
        "what is the number of listings from barrington, farmington, and rochester combined?";
    listings.example.gold = {"5"};
    listings.evidence_rows = {1, 2, 3, 4, 5};
    listings.evidence_cols = {1, 2};
    listings.cloze_response =
        "q1: the number of listings from barrington is {...}.\n"
        "q2: the number of listings from farmington is {...}.\n"
        "q3: the number of listings from rochester is {...}.";
    listings.sql_lines = {
        "SELECT COUNT(*) FROM w WHERE city or town = 'barrington'",
        "SELECT COUNT(*) FROM w WHERE city or town = 'farmington'",
        "SELECT COUNT(*) FROM w WHERE city or town = 'rochester'",
    };
    listings.joint_samples = {" 5", " 5", " the answer is 5.", " 5", " 5"};
    out.push_back(std::move(listings));

    ScriptedExample standings;
    standings.example.id = "qa-standings";
    standings.example.task = Task::QuestionAnswering;
    standings.example.table = standings_table();
    standings.example.question =
        "does the team have more 5th or 7th place finishes during the regular season?";
    standings.example.gold = {"5th"};
    standings.evidence_rows = {2, 3, 4, 5, 6};
    standings.evidence_cols = {1, 3};
    standings.cloze_response =
        "q1: the team have {...} 5th place finishes during the regular season.\n"
        "q2: the team have {...} 7th place finishes during the regular season.";
    standings.sql_lines = {
        "SELECT COUNT(*) FROM w WHERE reg.season LIKE '%5th%'",
        "SELECT COUNT(*) FROM w WHERE reg.season LIKE '%7th%'",
    };
    standings.joint_samples = {" 5th", " 5th", " 5th", " the answer is 5th.", " 5th"};
    out.push_back(std::move(standings));
    return out;
}

std::vector<ScriptedExample> demo_fv_examples() {
    std::vector<ScriptedExample> out;

    ScriptedExample golfers;
    golfers.example.id = "fv-golfers";
    golfers.example.task = Task::FactVerification;
    golfers.example.table = golfers_table();
    golfers.example.question =
        "pádraig harrington and graeme mcdowell are both fron northern ireland.";
    golfers.example.gold = {"no"};
    golfers.evidence_rows = {1, 2};
    golfers.evidence_cols = {2, 3};
    golfers.cloze_response =
        "q1: pádraig harrington is {...} fron northern ireland.\n"
        "q2: graeme mcdowell is {...} fron northern ireland.";
    golfers.sql_lines = {
        "SELECT COUNT(*) FROM w WHERE player = 'pádraig harrington' AND country = 'northern "
        "ireland'",
        "SELECT COUNT(*) FROM w WHERE player = 'graeme mcdowell' AND country = 'northern ireland'",
    };
    golfers.joint_samples = {" no", " false", " no", " no.", " no"};
    out.push_back(std::move(golfers));

    ScriptedExample division;
    division.example.id = "fv-division";
    division.example.task = Task::FactVerification;
    division.example.table = division_table();
    division.example.question =
        "atlético ciudad played 28 matches with an average of less than 0.61";
    division.example.gold = {"no"};
    division.evidence_rows = {1};
    division.evidence_cols = {1, 2, 4};
    division.cloze_response =
        "q1: atlético ciudad played {...} matches.\n"
        "q2: atlético ciudad played {...} matches with an average of less than 0.61.";
    division.sql_lines = {
        "SELECT SUM(matches) FROM w WHERE team = 'atlético ciudad'",
        "SELECT COUNT(*) FROM w WHERE team = 'atlético ciudad' AND average < 0.61",
    };
    division.joint_samples = {" no", " no", " false.", " no", " no"};
    out.push_back(std::move(division));
    return out;
}

std::vector<ScriptedExample> synthetic_examples(size_t count) {
    // Fixed-seed generator; avoids std::uniform_int_distribution so the
    // bytes are identical on every platform.
    std::mt19937 rng(20240615u);
    auto pick = [&rng](size_t n) { return static_cast<size_t>(rng() % n); };

    const std::vector<std::string> value_columns = {"units", "price", "rating", "stock", "weight"};
    std::vector<ScriptedExample> out;
    for (size_t k = 0; k < count; ++k) {
        size_t rows = 6 + pick(5);                       // 6..10
        size_t cols = 3 + pick(3);                       // 3..5 value columns
        std::vector<std::string> headers = {"item"};
        for (size_t c = 0; c < cols; ++c) headers.push_back(value_columns[c]);

        std::vector<std::vector<std::string>> grid;
        for (size_t r = 0; r < rows; ++r) {
            std::vector<std::string> row = {"item-" + std::to_string(k) + "-" +
                                            std::to_string(r + 1)};
            for (size_t c = 0; c < cols; ++c) row.push_back(std::to_string(1 + pick(500)));
            grid.push_back(std::move(row));
        }
        size_t target_row = pick(rows);
        size_t target_col = pick(cols);
        const std::string key = grid[target_row][0];
        const std::string column = headers[target_col + 1];
        const std::string value = grid[target_row][target_col + 1];

        ScriptedExample s;
        std::string ordinal = std::to_string(k + 1);
        if (ordinal.size() < 2) ordinal = "0" + ordinal;
        s.example.id = "syn-" + ordinal;
        s.example.task = Task::QuestionAnswering;
        s.example.table = Table("inventory sheet " + std::to_string(k + 1), headers, grid);
        s.example.question = "what is the " + column + " of " + key + "?";
        s.example.gold = {value};
        s.evidence_rows = {static_cast<int>(target_row + 1)};
        s.evidence_cols = {1, static_cast<int>(target_col + 2)};
        s.cloze_response = "q1: the " + column + " of " + key + " is {...}.";
        s.sql_lines = {"SELECT " + column + " FROM w WHERE item = '" + key + "'"};
        s.joint_samples = {" " + value, " " + value, " the answer is " + value + ".",
                           " " + value, " " + value};
        out.push_back(std::move(s));
    }
    return out;
}

void write_fixtures(const std::string& dir, int joint_samples, double joint_temperature) {
    namespace fs = std::filesystem;
    fs::create_directories(fs::path(dir) / "exemplars");
    fs::create_directories(fs::path(dir) / "demo");
    fs::create_directories(fs::path(dir) / "synthetic");

    const std::string exemplar_dir = (fs::path(dir) / "exemplars").string();
    write_evidence_exemplars(evidence_exemplars(), exemplar_dir + "/evidence.json");
    write_cloze_exemplars(cloze_exemplars(), exemplar_dir + "/cloze.json");
    write_sql_exemplars(sql_exemplars(), exemplar_dir + "/sql.json");
    write_joint_exemplars(joint_exemplars_fv(), exemplar_dir + "/joint_fv.json");
    write_joint_exemplars(joint_exemplars_qa(), exemplar_dir + "/joint_qa.json");
    write_joint_exemplars(joint_exemplars_free(), exemplar_dir + "/joint_free.json");

    StageExemplars qa_exemplars{evidence_exemplars(), cloze_exemplars(), sql_exemplars(),
                                joint_exemplars_qa()};
    StageExemplars fv_exemplars{evidence_exemplars(), cloze_exemplars(), sql_exemplars(),
                                joint_exemplars_fv()};

    const std::string demo_dir = (fs::path(dir) / "demo").string();
    std::vector<ScriptedExample> qa = demo_qa_examples();
    std::vector<ScriptedExample> fv = demo_fv_examples();
    write_examples(qa, demo_dir + "/qa.jsonl");
    write_examples(fv, demo_dir + "/fv.jsonl");
    {
        fs::remove(demo_dir + "/replay.jsonl");
        llm::ReplayStore store(demo_dir + "/replay.jsonl");
        for (const ScriptedExample& s : qa)
            script_example(store, s, qa_exemplars, joint_samples, joint_temperature);
        for (const ScriptedExample& s : fv)
            script_example(store, s, fv_exemplars, joint_samples, joint_temperature);
    }

    const std::string syn_dir = (fs::path(dir) / "synthetic").string();
    std::vector<ScriptedExample> syn = synthetic_examples(20);
    write_examples(syn, syn_dir + "/dataset.jsonl");
    {
        fs::remove(syn_dir + "/replay.jsonl");
        llm::ReplayStore store(syn_dir + "/replay.jsonl");
        for (const ScriptedExample& s : syn)
            script_example(store, s, qa_exemplars, joint_samples, joint_temperature);
    }
}

} // namespace dater::fixtures

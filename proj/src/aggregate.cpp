#include "embedforge/eval/aggregate.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "embedforge/core/error.hpp"
#include "embedforge/core/jsonl.hpp"

namespace embedforge {

const char* task_type_name(TaskType t) {
    switch (t) {
        case TaskType::classification: return "classification";
        case TaskType::multilabel: return "multilabel";
        case TaskType::pair_classification: return "pair_classification";
        case TaskType::retrieval: return "retrieval";
        case TaskType::reranking: return "reranking";
        case TaskType::clustering: return "clustering";
        case TaskType::sts: return "sts";
    }
    return "retrieval";
}

TaskType task_type_from_name(const std::string& name) {
    if (name == "classification") return TaskType::classification;
    if (name == "multilabel") return TaskType::multilabel;
    if (name == "pair_classification") return TaskType::pair_classification;
    if (name == "retrieval") return TaskType::retrieval;
    if (name == "reranking") return TaskType::reranking;
    if (name == "clustering") return TaskType::clustering;
    if (name == "sts") return TaskType::sts;
    throw Error(ErrorKind::ConfigError, "unknown task type '" + name + "'");
}

EvalReport aggregate(const std::vector<DatasetScore>& scores) {
    if (scores.empty()) throw Error(ErrorKind::EmptyReport, "no dataset scores");
    EvalReport report;
    report.datasets = scores;

    std::map<TaskType, double> sums;
    std::map<TaskType, std::size_t> counts;
    double total = 0.0;
    for (const auto& s : scores) {
        sums[s.task] += s.score;
        counts[s.task] += 1;
        total += s.score;
    }
    report.avg_d = total / static_cast<double>(scores.size());
    double task_total = 0.0;
    for (const auto& [task, sum] : sums) {
        const double mean = sum / static_cast<double>(counts[task]);
        report.task_means[task] = mean;
        task_total += mean;
    }
    report.avg_t = task_total / static_cast<double>(report.task_means.size());
    return report;
}

namespace {

std::string fmt1(double v) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(1) << v;
    return out.str();
}

}  // namespace

std::string report_markdown(const EvalReport& report, const std::string& model_name) {
    static const TaskType order[7] = {
        TaskType::classification, TaskType::multilabel, TaskType::pair_classification,
        TaskType::reranking,      TaskType::retrieval,  TaskType::clustering,
        TaskType::sts};
    std::ostringstream out;
    out << "| Model | Cls | MLCls | PCls | Rrnk | Rtr | Clust | STS | AvgD | AvgT |\n";
    out << "|---|---|---|---|---|---|---|---|---|---|\n";
    out << "| " << model_name << " |";
    for (TaskType t : order) {
        auto it = report.task_means.find(t);
        out << " " << (it == report.task_means.end() ? std::string("-") : fmt1(it->second)) << " |";
    }
    out << " " << fmt1(report.avg_d) << " | " << fmt1(report.avg_t) << " |\n";
    return out.str();
}

void save_report(const std::string& path, const EvalReport& report) {
    std::ofstream out(path);
    if (!out) throw Error(ErrorKind::FileMissing, "cannot open for write: " + path);
    json obj;
    obj["datasets"] = json::array();
    for (const auto& d : report.datasets) {
        obj["datasets"].push_back(
            {{"dataset", d.dataset}, {"task", task_type_name(d.task)}, {"score", d.score}});
    }
    obj["task_means"] = json::object();
    for (const auto& [task, mean] : report.task_means) {
        obj["task_means"][task_type_name(task)] = mean;
    }
    obj["avg_d"] = report.avg_d;
    obj["avg_t"] = report.avg_t;
    out << obj.dump(2) << "\n";
}

EvalReport load_report(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorKind::FileMissing, path);
    json obj;
    try {
        obj = json::parse(in);
    } catch (const json::parse_error& e) {
        throw Error(ErrorKind::SchemaViolation, path + ": " + e.what());
    }
    std::vector<DatasetScore> scores;
    for (const auto& d : obj.at("datasets")) {
        scores.push_back({d.at("dataset").get<std::string>(),
                          task_type_from_name(d.at("task").get<std::string>()),
                          d.at("score").get<double>()});
    }
    return aggregate(scores);
}

}  // namespace embedforge

#pragma once

#include <map>
#include <string>
#include <vector>

namespace embedforge {

enum class TaskType {
    classification,
    multilabel,
    pair_classification,
    retrieval,
    reranking,
    clustering,
    sts,
};

const char* task_type_name(TaskType t);
TaskType task_type_from_name(const std::string& name);

struct DatasetScore {
    std::string dataset;
    TaskType task = TaskType::retrieval;
    double score = 0.0;  // in [0, 100]
};

struct EvalReport {
    std::vector<DatasetScore> datasets;
    std::map<TaskType, double> task_means;
    double avg_d = 0.0;  // unweighted mean over datasets
    double avg_t = 0.0;  // mean of the per-task means
};

EvalReport aggregate(const std::vector<DatasetScore>& scores);

// Markdown row in benchmark-table column order (Cls, MLCls, PCls, Rrnk,
// Rtr, Clust, STS, AvgD, AvgT), rounded to 1 decimal at presentation only.
std::string report_markdown(const EvalReport& report, const std::string& model_name);

void save_report(const std::string& path, const EvalReport& report);
EvalReport load_report(const std::string& path);

}  // namespace embedforge

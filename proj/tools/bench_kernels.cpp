// Times the serial reference kernels against their OpenMP variants on
// synthetic data and prints a side-by-side table. The two variants must
// produce identical results; any mismatch is reported and fails the run.

#include <chrono>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "embedforge/core/parallel.hpp"
#include "embedforge/core/rng.hpp"
#include "embedforge/eval/kernels.hpp"
#include "embedforge/mining/negative_miner.hpp"
#include "embedforge/training/batch_builder.hpp"
#include "embedforge/training/toy_trainer.hpp"

using namespace embedforge;

namespace {

double time_ms(const std::function<void()>& fn, int repeats) {
    const auto start = std::chrono::steady_clock::now();
    for (int i = 0; i < repeats; ++i) fn();
    const auto end = std::chrono::steady_clock::now();
    return std::chrono::duration<double, std::milli>(end - start).count() /
           static_cast<double>(repeats);
}

int failures = 0;

void row(const std::string& name, double serial_ms, double parallel_ms, bool match) {
    std::printf("%-24s %10.2f ms %10.2f ms %8.2fx   %s\n", name.c_str(), serial_ms, parallel_ms,
                serial_ms / parallel_ms, match ? "identical" : "MISMATCH");
    if (!match) ++failures;
}

}  // namespace

int main() {
    std::printf("%d OpenMP thread(s)\n", max_threads());
    std::printf("%-24s %13s %13s %9s\n", "kernel", "serial", "parallel", "speedup");

    RngStream rng(7);

    {  // cosine ranking: 256 queries x 2048 docs x 64 dims
        std::vector<std::vector<float>> queries(256, std::vector<float>(64));
        std::vector<std::vector<float>> docs(2048, std::vector<float>(64));
        for (auto& q : queries)
            for (auto& x : q) x = static_cast<float>(rng.gaussian());
        for (auto& d : docs)
            for (auto& x : d) x = static_cast<float>(rng.gaussian());
        std::vector<std::vector<std::uint32_t>> serial_out, parallel_out;
        const double s = time_ms([&] { serial_out = rank_by_cosine(queries, docs, ExecPolicy::serial); }, 3);
        const double p = time_ms([&] { parallel_out = rank_by_cosine(queries, docs, ExecPolicy::parallel); }, 3);
        row("rank_by_cosine", s, p, serial_out == parallel_out);
    }

    {  // k-means: 4096 points x 32 dims, k=16
        std::vector<std::vector<float>> points(4096, std::vector<float>(32));
        for (auto& pt : points)
            for (auto& x : pt) x = static_cast<float>(rng.gaussian());
        KMeansResult serial_out, parallel_out;
        const double s = time_ms([&] { serial_out = kmeans(points, 16, 2, 50, 11, ExecPolicy::serial); }, 1);
        const double p = time_ms([&] { parallel_out = kmeans(points, 16, 2, 50, 11, ExecPolicy::parallel); }, 1);
        row("kmeans", s, p,
            serial_out.assignment == parallel_out.assignment &&
                serial_out.inertia == parallel_out.inertia);
    }

    {  // InfoNCE: 512 rows x 1024 candidates
        std::vector<std::vector<double>> sims(512, std::vector<double>(1024));
        std::vector<std::size_t> labels(512);
        for (std::size_t i = 0; i < sims.size(); ++i) {
            for (auto& x : sims[i]) x = rng.gaussian();
            labels[i] = i;
        }
        InfoNceResult serial_out, parallel_out;
        const double s = time_ms([&] { serial_out = infonce_loss(sims, labels, 0.05, ExecPolicy::serial); }, 5);
        const double p = time_ms([&] { parallel_out = infonce_loss(sims, labels, 0.05, ExecPolicy::parallel); }, 5);
        row("infonce_loss", s, p,
            serial_out.loss == parallel_out.loss && serial_out.grad == parallel_out.grad);
    }

    {  // batch encoding: 2048 short texts
        const ToyTask task = make_separable_topic_task(8, 256, 0, 0, 3);
        ToyEncoder encoder(4096, 64, 3);
        std::vector<std::string> texts;
        for (const auto& t : task.train) texts.push_back(t.positive);
        std::vector<std::vector<double>> serial_out, parallel_out;
        const double s = time_ms([&] { serial_out = encoder.encode_batch(texts, ExecPolicy::serial); }, 3);
        const double p = time_ms([&] { parallel_out = encoder.encode_batch(texts, ExecPolicy::parallel); }, 3);
        row("encode_batch", s, p, serial_out == parallel_out);
    }

    {  // mining: 512 queries x 1024 docs
        ScoreRun run;
        std::map<std::string, std::map<std::string, int>> qrels;
        for (int q = 0; q < 512; ++q) {
            const std::string qid = "q" + std::to_string(q);
            auto& scores = run[qid];
            for (int d = 0; d < 1024; ++d) {
                scores["d" + std::to_string(d)] = rng.real01();
            }
            qrels[qid]["d" + std::to_string(q)] = 1;
        }
        MiningParams params;
        params.seed = 5;
        MiningOutcome serial_out, parallel_out;
        const double s = time_ms([&] { serial_out = mine_run(run, qrels, params, ExecPolicy::serial); }, 1);
        const double p = time_ms([&] { parallel_out = mine_run(run, qrels, params, ExecPolicy::parallel); }, 1);
        bool match = serial_out.mined.size() == parallel_out.mined.size() &&
                     serial_out.empty_eligible == parallel_out.empty_eligible;
        for (std::size_t i = 0; match && i < serial_out.mined.size(); ++i) {
            match = serial_out.mined[i].sampled == parallel_out.mined[i].sampled &&
                    serial_out.mined[i].sigma == parallel_out.mined[i].sigma;
        }
        row("mine_run", s, p, match);
    }

    if (failures) {
        std::printf("\n%d kernel(s) diverged from the serial reference\n", failures);
        return 1;
    }
    return 0;
}

#pragma once

#include <cstddef>
#include <filesystem>
#include <vector>

namespace opinn {

// N x T matrix of per-user opinions over discrete time, row-major by user.
// Column 0 is the initial condition.
class OpinionSeries {
public:
    OpinionSeries() : users_(0), steps_(0) {}
    OpinionSeries(std::size_t users, std::size_t steps)
        : users_(users), steps_(steps), data_(users * steps, 0.0) {}

    std::size_t num_users() const { return users_; }
    std::size_t num_steps() const { return steps_; }

    double& at(std::size_t user, std::size_t t) { return data_[user * steps_ + t]; }
    double at(std::size_t user, std::size_t t) const { return data_[user * steps_ + t]; }

    std::vector<double> column(std::size_t t) const;
    void set_column(std::size_t t, const std::vector<double>& values);

    const std::vector<double>& data() const { return data_; }
    std::vector<double>& data() { return data_; }

    bool operator==(const OpinionSeries&) const = default;

private:
    std::size_t users_;
    std::size_t steps_;
    std::vector<double> data_;
};

// Per-user piecewise-linear resampling onto `target` uniformly spaced points
// spanning the original column index range; endpoints preserved exactly.
OpinionSeries interpolate_linear(const OpinionSeries& series, std::size_t target);

// CSV with header "t0,t1,...", row i = user i, shortest round-trip decimals.
void save_series_csv(const OpinionSeries& s, const std::filesystem::path& path);
OpinionSeries load_series_csv(const std::filesystem::path& path);

}  // namespace opinn

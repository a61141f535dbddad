#pragma once

#include <algorithm>
#include <chrono>
#include <mutex>
#include <thread>

namespace solaudit {

// Blocking token bucket. Shared by concurrent workers; fairness is not
// guaranteed but starvation is bounded by the refill rate.
class TokenBucket {
public:
    TokenBucket(double rate_per_sec, double capacity)
        : rate_(rate_per_sec), capacity_(capacity), tokens_(capacity),
          last_(std::chrono::steady_clock::now()) {}

    void acquire() {
        while (true) {
            {
                std::lock_guard<std::mutex> lock(mutex_);
                refill();
                if (tokens_ >= 1.0) {
                    tokens_ -= 1.0;
                    return;
                }
            }
            std::this_thread::sleep_for(std::chrono::milliseconds(5));
        }
    }

private:
    void refill() {
        auto now = std::chrono::steady_clock::now();
        double elapsed = std::chrono::duration<double>(now - last_).count();
        last_ = now;
        tokens_ = std::min(capacity_, tokens_ + elapsed * rate_);
    }

    std::mutex mutex_;
    double rate_;
    double capacity_;
    double tokens_;
    std::chrono::steady_clock::time_point last_;
};

}  // namespace solaudit

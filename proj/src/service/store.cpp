#include "captchastar/service/store.hpp"

#include <stdexcept>

namespace captchastar::service {

std::string_view to_string(ChallengeStatus s) {
    switch (s) {
        case ChallengeStatus::active: return "active";
        case ChallengeStatus::passed: return "passed";
        case ChallengeStatus::failed: return "failed";
        case ChallengeStatus::expired: return "expired";
    }
    return "unknown";
}

ChallengeStore::ChallengeStore(std::chrono::seconds ttl) : ttl_(ttl) {
    if (ttl.count() <= 0) {
        throw std::invalid_argument("challenge TTL must be positive");
    }
}

bool ChallengeStore::expired(const Entry& e, Clock::time_point now) const {
    return now - e.challenge.created_at > ttl_;
}

void ChallengeStore::insert(Challenge challenge) {
    std::lock_guard lock(mutex_);
    std::string id = challenge.id;
    Entry e;
    e.progress.matched.assign(challenge.solutions.size(), false);
    e.challenge = std::move(challenge);
    if (!entries_.emplace(std::move(id), std::move(e)).second) {
        throw std::invalid_argument("duplicate challenge id");
    }
}

std::optional<ChallengeStatus> ChallengeStore::status(const std::string& id) const {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(id);
    if (it == entries_.end()) {
        return std::nullopt;
    }
    return it->second.status;
}

ChallengeStore::Attempt ChallengeStore::verify(const std::string& id, Point answer, Clock::time_point now) {
    std::lock_guard lock(mutex_);
    const auto it = entries_.find(id);
    if (it == entries_.end()) {
        return {};
    }
    Entry& e = it->second;
    if (e.status == ChallengeStatus::active && expired(e, now)) {
        e.status = ChallengeStatus::expired;
    }
    if (e.status != ChallengeStatus::active) {
        return {};
    }
    VerifyProgress progress = e.progress;
    const VerifyOutcome outcome = captchastar::verify(answer, e.challenge, progress);
    e.progress = std::move(progress);
    if (outcome.passed) {
        e.status = ChallengeStatus::passed;
    } else if (!outcome.matched) {
        e.status = ChallengeStatus::failed;
    }
    return {true, outcome};
}

std::size_t ChallengeStore::sweep_expired(Clock::time_point now) {
    std::lock_guard lock(mutex_);
    std::size_t count = 0;
    for (auto it = entries_.begin(); it != entries_.end();) {
        Entry& e = it->second;
        if (e.status == ChallengeStatus::active && expired(e, now)) {
            e.status = ChallengeStatus::expired;
            ++count;
        }
        if (e.status != ChallengeStatus::active && now - e.challenge.created_at > 2 * ttl_) {
            it = entries_.erase(it);
        } else {
            ++it;
        }
    }
    return count;
}

std::size_t ChallengeStore::size() const {
    std::lock_guard lock(mutex_);
    return entries_.size();
}

std::size_t ChallengeStore::active_count() const {
    std::lock_guard lock(mutex_);
    std::size_t n = 0;
    for (const auto& [id, e] : entries_) {
        n += e.status == ChallengeStatus::active ? 1U : 0U;
    }
    return n;
}

}  // namespace captchastar::service

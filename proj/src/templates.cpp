#include "stigsim/scenario.hpp"

namespace stigsim {

namespace {

json observation(const std::string& mode, Height lag, Height confirmations, bool mempool) {
    return json{{"mode", mode},
                {"lagBlocks", lag},
                {"confirmationBlocks", confirmations},
                {"mempoolVisible", mempool}};
}

json task(Amount reward, Height deadline_offset, Height difficulty, const std::string& capability) {
    return json{{"reward", reward},
                {"deadlineOffsetBlocks", deadline_offset},
                {"difficultyBlocks", difficulty},
                {"capability", capability}};
}

json taskboard_benign() {
    json tasks = json::array();
    for (int i = 0; i < 5; ++i) tasks.push_back(task(100, 30, 2, "generic"));
    return json{
        {"seed", 42},
        {"styles", json::array({"STIG", "MSG", "ORCH"})},
        {"pattern", "STATE_FLAG"},
        {"ticks", 40},
        {"blockGasLimit", 100000},
        {"orderingPolicy", "GAS_PRICE_DESC"},
        {"partitions", 1},
        {"contract", json{{"stakeRateMicro", 100000}, {"claimTimeoutBlocks", 10}}},
        {"baseline", json{{"msgLatencyTicks", 1},
                          {"negotiationWindowTicks", 1},
                          {"orchLatencyTicks", 1},
                          {"orchCapacity", 2}}},
        {"agents", json::array({json{{"count", 10},
                                     {"strategy", "HONEST"},
                                     {"observation", observation("STORAGE_POLL", 0, 0, false)},
                                     {"capability", "generic"},
                                     {"gasPrice", 10},
                                     {"balance", 5000}}})},
        {"tasks", json{{"initial", tasks}}},
        {"posterBalance", 10000},
        {"posterGasPrice", 20}};
}

json taskboard_adversarial() {
    json tasks = json::array();
    for (int i = 0; i < 5; ++i) tasks.push_back(task(100, 60, 2, "generic"));
    return json{
        {"seed", 7},
        {"styles", json::array({"STIG", "MSG", "ORCH"})},
        {"pattern", "STATE_FLAG"},
        {"ticks", 70},
        {"blockGasLimit", 100000},
        {"orderingPolicy", "GAS_PRICE_DESC"},
        {"partitions", 1},
        {"contract", json{{"stakeRateMicro", 100000}, {"claimTimeoutBlocks", 10}}},
        {"baseline", json{{"msgLatencyTicks", 1},
                          {"negotiationWindowTicks", 1},
                          {"orchLatencyTicks", 1},
                          {"orchCapacity", 2}}},
        {"agents",
         json::array({json{{"count", 5},
                           {"strategy", "HONEST"},
                           {"observation", observation("STORAGE_POLL", 0, 0, false)},
                           {"capability", "generic"},
                           {"gasPrice", 10},
                           {"balance", 5000}},
                      // griefers outbid honest agents and hold claims until
                      // the timeout reverts them; budget bounds the abuse
                      json{{"count", 3},
                           {"strategy", "GRIEFER"},
                           {"observation", observation("STORAGE_POLL", 0, 0, false)},
                           {"capability", "generic"},
                           {"gasPrice", 12},
                           {"gasBudget", 1300},
                           {"balance", 2000}}})},
        {"tasks", json{{"initial", tasks}}},
        {"posterBalance", 10000},
        {"posterGasPrice", 20}};
}

json liquidation() {
    json positions = json::array();
    for (int i = 0; i < 6; ++i)
        positions.push_back(json{{"collateral", 150}, {"debt", 100}});
    return json{
        {"seed", 11},
        {"styles", json::array({"STIG"})},
        {"pattern", "THRESHOLD"},
        {"ticks", 36},
        {"blockGasLimit", 100000},
        {"orderingPolicy", "GAS_PRICE_DESC"},
        {"partitions", 1},
        {"contract", json{{"liquidationBonusMicro", 50000},
                          {"oracleMode", "SINGLE"},
                          {"oracleFeeds", 1},
                          {"poolLiquidity", 2000}}},
        {"agents", json::array({json{{"count", 3},
                                     {"strategy", "HONEST"},
                                     {"observation", observation("STORAGE_POLL", 0, 0, false)},
                                     {"capability", "liquidator"},
                                     {"gasPrice", 10},
                                     {"balance", 20000}}})},
        {"positions", json{{"initial", positions}, {"borrowerBalance", 2000}}},
        {"posterBalance", 10000},
        {"posterGasPrice", 20},
        {"priceWalk", json{{"enabled", true},
                           {"startMicro", 1000000},
                           {"stepMicro", 150000},
                           {"everyTicks", 2},
                           {"downBiasMicro", 750000},
                           {"floorMicro", 300000},
                           {"capMicro", 1500000},
                           {"freezeTailTicks", 4}}},
        {"oracleBalance", 5000},
        {"oracleGasPrice", 5}};
}

json commit_reveal() {
    json tasks = json::array();
    for (int i = 0; i < 5; ++i) tasks.push_back(task(100, 40, 2, "generic"));
    return json{
        {"seed", 5},
        {"styles", json::array({"STIG"})},
        {"pattern", "COMMIT_REVEAL"},
        {"ticks", 45},
        {"blockGasLimit", 100000},
        {"orderingPolicy", "GAS_PRICE_DESC"},
        {"partitions", 1},
        {"contract", json{{"stakeRateMicro", 100000},
                          {"claimTimeoutBlocks", 10},
                          {"commitWindowBlocks", 2},
                          {"revealWindowBlocks", 3},
                          {"commitStake", 10}}},
        {"agents",
         json::array({json{{"count", 4},
                           {"strategy", "HONEST"},
                           {"observation", observation("STORAGE_POLL", 0, 0, false)},
                           {"capability", "generic"},
                           {"gasPrice", 10},
                           {"balance", 5000}},
                      json{{"count", 1},
                           {"strategy", "FRONTRUNNER"},
                           {"observation", observation("STORAGE_POLL", 0, 0, true)},
                           {"capability", "generic"},
                           {"gasPrice", 10},
                           {"gasBump", 1},
                           {"balance", 5000}}})},
        {"tasks", json{{"initial", tasks}}},
        {"posterBalance", 10000},
        {"posterGasPrice", 20}};
}

json partition_sweep() {
    return json{
        {"seed", 99},
        {"styles", json::array({"STIG"})},
        {"pattern", "STATE_FLAG"},
        {"ticks", 50},
        {"blockGasLimit", 100000},
        {"orderingPolicy", "GAS_PRICE_DESC"},
        {"partitions", 4},
        {"contract", json{{"stakeRateMicro", 100000}, {"claimTimeoutBlocks", 10}}},
        {"agents", json::array({json{{"count", 12},
                                     {"strategy", "HONEST"},
                                     {"observation", observation("STORAGE_POLL", 0, 0, false)},
                                     {"capability", "generic"},
                                     {"gasPrice", 10},
                                     {"balance", 5000}}})},
        {"tasks", json{{"initial", json::array()},
                       {"arrivals", json{{"count", 12},
                                         {"startTick", 2},
                                         {"rateMicro", 600000},
                                         {"reward", 100},
                                         {"deadlineOffsetBlocks", 30},
                                         {"difficultyBlocks", 2},
                                         {"capability", "generic"}}}}},
        {"posterBalance", 20000},
        {"posterGasPrice", 20}};
}

}  // namespace

std::vector<std::string> template_names() {
    return {"taskboard-benign", "taskboard-adversarial", "liquidation", "commit-reveal",
            "partition-sweep"};
}

json template_config(const std::string& name) {
    if (name == "taskboard-benign") return taskboard_benign();
    if (name == "taskboard-adversarial") return taskboard_adversarial();
    if (name == "liquidation") return liquidation();
    if (name == "commit-reveal") return commit_reveal();
    if (name == "partition-sweep") return partition_sweep();
    std::string known;
    for (const auto& n : template_names()) known += (known.empty() ? "" : ", ") + n;
    throw ConfigError("template", "unknown template " + name + " (known: " + known + ")");
}

}  // namespace stigsim

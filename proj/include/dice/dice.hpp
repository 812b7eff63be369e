#pragma once

#include "dice/bandit.hpp"
#include "dice/environments.hpp"
#include "dice/errors.hpp"
#include "dice/mdp.hpp"
#include "dice/operators.hpp"
#include "dice/policy.hpp"
#include "dice/runtime/actor.hpp"
#include "dice/runtime/checkpoint.hpp"
#include "dice/runtime/config.hpp"
#include "dice/runtime/data_collector.hpp"
#include "dice/runtime/learner.hpp"
#include "dice/runtime/parameter_server.hpp"
#include "dice/runtime/training.hpp"
#include "dice/tables.hpp"
#include "dice/traces.hpp"
#include "dice/trajectory.hpp"

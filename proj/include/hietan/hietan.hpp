#pragma once

#include "hietan/bayes.hpp"
#include "hietan/chowliu_tan.hpp"
#include "hietan/dataset.hpp"
#include "hietan/dependency_tree.hpp"
#include "hietan/errors.hpp"
#include "hietan/eval.hpp"
#include "hietan/hie_mst.hpp"
#include "hietan/hie_mst_lite.hpp"
#include "hietan/hierarchy.hpp"
#include "hietan/infostats.hpp"
#include "hietan/json_io.hpp"
#include "hietan/rng.hpp"
#include "hietan/version.hpp"

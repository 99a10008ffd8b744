#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "billiard/types.hpp"

namespace billiard {

// Base of every failure the library reports. Callers that only care about
// "something went wrong" catch this; probe code catches the specific kinds.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidMatrix : public Error {
 public:
  using Error::Error;
};

class InvalidParams : public Error {
 public:
  using Error::Error;
};

class PackingError : public Error {
 public:
  using Error::Error;
};

class NotAtContact : public Error {
 public:
  using Error::Error;
};

// Raised by regular flow when the earliest event is tangential or when two
// events coincide. The offending events are carried for probe consumers.
class SingularEvent : public Error {
 public:
  SingularEvent(EventKind kind, std::vector<CollisionEvent> events, double elapsed);

  EventKind kind() const noexcept { return kind_; }
  const std::vector<CollisionEvent>& events() const noexcept { return events_; }
  // Flow time at which the singular event was reached.
  double elapsed() const noexcept { return elapsed_; }

 private:
  EventKind kind_;
  std::vector<CollisionEvent> events_;
  double elapsed_;
};

class NoPastReflection : public Error {
 public:
  using Error::Error;
};

class PrescriptionStalled : public Error {
 public:
  PrescriptionStalled(std::size_t consumed, const std::string& what);
  std::size_t consumed() const noexcept { return consumed_; }

 private:
  std::size_t consumed_;
};

class InvalidPair : public Error {
 public:
  using Error::Error;
};

class NotConnected : public Error {
 public:
  explicit NotConnected(int components);
  int components() const noexcept { return components_; }

 private:
  int components_;
};

class SingularSegment : public Error {
 public:
  using Error::Error;
};

class EmbeddingViolation : public Error {
 public:
  using Error::Error;
};

class NoRelation : public Error {
 public:
  using Error::Error;
};

class FragileSegment : public Error {
 public:
  using Error::Error;
};

class SequenceUnstable : public Error {
 public:
  using Error::Error;
};

class NotEnoughSamples : public Error {
 public:
  using Error::Error;
};

class SequenceUnrealizable : public Error {
 public:
  using Error::Error;
};

class NoTransversalEntry : public Error {
 public:
  using Error::Error;
};

class InvalidFamily : public Error {
 public:
  using Error::Error;
};

class EnvelopeMismatch : public Error {
 public:
  using Error::Error;
};

}  // namespace billiard

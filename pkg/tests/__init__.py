# Tests for the fine-grained self-supervision toolkit

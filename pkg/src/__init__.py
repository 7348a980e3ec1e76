# Fine-grained self-supervision toolkit

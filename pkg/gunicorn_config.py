"""Gunicorn configuration for the planning API."""
import os

# Server socket
bind = f"0.0.0.0:{os.environ.get('PORT', '10000')}"

# Every worker loads its own copy of the knowledge base; runs are CPU bound
# (motion planning), so threads only help while waiting on an http backend.
workers = int(os.environ.get('WEB_CONCURRENCY', '1'))
worker_class = "gthread"
threads = int(os.environ.get('ONTO_TAMP_THREADS', '4'))
max_requests = 1000
max_requests_jitter = 100

# A run may ask the backend up to MAX_CALLS times
timeout = int(os.environ.get('ONTO_TAMP_TIMEOUT', '300'))
graceful_timeout = 30

# Logging
loglevel = os.environ.get('LOG_LEVEL', 'info')
accesslog = "-"
errorlog = "-"
access_log_format = '%(h)s "%(r)s" %(s)s %(b)s %(L)ss'

proc_name = "onto-tamp"
preload_app = False

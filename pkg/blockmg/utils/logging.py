import logging
import logging.config

# Progress bars (tqdm) and log records share stderr; results go to stdout.
logger_configuration = {
    "version" : 1,
    "disable_existing_loggers" : False,
    "formatters" : {
        "default": {
            "format" : "[{asctime}] {levelname:<7} {message}",
            "datefmt" : "%Y-%m-%d %H:%M:%S",
            "style" : "{",
            "validate" : True
        },
        "warnings": {
            "format" : "[{asctime}] WARNING {message}",
            "datefmt" : "%Y-%m-%d %H:%M:%S",
            "style" : "{",
            "validate" : True
        },
    },
    "handlers" : {
        "stderr" : {
            "class" : "logging.StreamHandler",
            "formatter" : "default",
            "stream": "ext://sys.stderr",
        },
        "pywarnings" : {
            "class" : "logging.StreamHandler",
            "formatter" : "warnings",
            "stream": "ext://sys.stderr",
        },
    },
    "loggers" : {
        "BlockMG" : {
            "handlers" : ["stderr"],
            "level" : "WARNING",
            "propagate" : False,
        },
        # SmallSizeWarning, MissingCoefficientsWarning, ...
        "py.warnings" : {
            "handlers" : ["pywarnings"],
            "level" : "WARNING",
            "propagate" : False,
        },
    },
}

logging.config.dictConfig(logger_configuration)
logging.captureWarnings(True)
